"""Progressive DCT-domain multi-frame super-resolution."""
from .dctcodec import ZonalMask, apply_zonal_mask, dct2_block, idct2_block, zonal_mask
from .deblur import IbdConfig, ibd_restore
from .degrade import DegradationParams, simulate
from .errors import (
    BoundsError,
    DegenerateInputError,
    FormatError,
    ParameterError,
    SRError,
    StreamError,
)
from .fuse import fuse_max_frequency
from .imgcore import from_blocks, load_pgm, save_pgm, to_blocks
from .interp import InterpConfig, adaptive_interpolate
from .metrics import MetricsReport, evaluate, isnr, mse, mssim, psnr, srf
from .progressive import ProgressiveDecoder, StagedBitstream, decode_upto, encode
from .register import RegistrationEstimate, align, estimate_rotation, phase_correlate

__version__ = "0.1.0"
