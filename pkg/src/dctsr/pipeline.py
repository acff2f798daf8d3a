"""End-to-end encoder and decoder chains built from the individual stages."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import degrade as dg
from .dctcodec import (
    ZonalMask,
    apply_zonal_mask,
    coefs_to_image,
    image_to_coefs,
    masked_noise_shape,
    zonal_mask,
)
from .deblur import IbdConfig, estimate_noise_sigma, ibd_restore
from .errors import ParameterError
from .fuse import fuse_max_frequency
from .imgcore import as_image
from .interp import InterpConfig, adaptive_interpolate
from .metrics import MetricsReport, evaluate, mse, psnr
from .progressive import StagedBitstream, decode_upto, encode
from .register import RegistrationEstimate, align


def register_frames(frames: Sequence[np.ndarray]) -> Tuple[List[np.ndarray], List[RegistrationEstimate]]:
    """Align every frame to the first one."""
    if not frames:
        raise ParameterError("no frames to register")
    ref = as_image(frames[0])
    aligned, estimates = [ref.copy()], [RegistrationEstimate()]
    for frame in frames[1:]:
        img, est = align(ref, frame)
        aligned.append(img)
        estimates.append(est)
    return aligned, estimates


def restore_frame(
    frame, mask: ZonalMask, ibd: Optional[IbdConfig], noise_sigma: Optional[float] = None
) -> np.ndarray:
    """Block DCT -> zonal mask -> blind deconvolution -> masked block DCT.

    ``noise_sigma`` overrides the estimate taken from ``frame`` when
    ``ibd.noise_sigma`` is unset (resampled frames under-report noise).
    """
    frame = as_image(frame)
    h, w = frame.shape
    masked = apply_zonal_mask(image_to_coefs(frame), mask)
    if ibd is None:
        return masked
    if ibd.noise_sigma is None:
        # masking hides the noise from the estimator; measure it beforehand
        sigma = estimate_noise_sigma(frame) if noise_sigma is None else noise_sigma
        ibd = replace(ibd, noise_sigma=sigma)
    padded = coefs_to_image(masked, masked.shape[1] * 8, masked.shape[0] * 8)
    shape = masked_noise_shape(mask, padded.shape)
    restored, _ = ibd_restore(padded, ibd, noise_shape=shape)
    return apply_zonal_mask(image_to_coefs(restored[:h, :w]), mask)


def encode_frames(
    frames: Sequence[np.ndarray],
    mask: ZonalMask,
    ibd: Optional[IbdConfig] = IbdConfig(),
    noise_sigmas: Optional[Sequence[float]] = None,
) -> StagedBitstream:
    """Encoder chain for already registered frames.

    ``noise_sigmas`` gives per-frame noise levels, typically measured on
    the frames before registration.
    """
    if not frames:
        raise ParameterError("no frames to encode")
    shape = as_image(frames[0]).shape
    for i, f in enumerate(frames):
        if np.shape(f) != shape:
            raise ParameterError(f"frame {i} has shape {np.shape(f)}, expected {shape}")
    if noise_sigmas is None:
        noise_sigmas = [None] * len(frames)
    elif len(noise_sigmas) != len(frames):
        raise ParameterError(f"{len(noise_sigmas)} noise levels for {len(frames)} frames")
    grids = [restore_frame(f, mask, ibd, s) for f, s in zip(frames, noise_sigmas)]
    fused = fuse_max_frequency(grids)
    return encode(fused, mask, shape[1], shape[0])


def decode_stream(
    bs: StagedBitstream, stages: Optional[int] = None, factor: int = 2, interp: InterpConfig = InterpConfig()
) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Decode ``stages`` stages (default: all received) and interpolate.

    Returns the interpolated image and the per-stage coarse images.
    """
    k = len(bs.stages) if stages is None else stages
    coarse = [decode_upto(bs, i) for i in range(1, k + 1)]
    return adaptive_interpolate(coarse[-1], factor, interp), coarse


def stage_mse_curve(bs: StagedBitstream) -> List[float]:
    """MSE of each partial decode against the full decode."""
    final = decode_upto(bs, len(bs.stages))
    return [mse(decode_upto(bs, k), final) for k in range(1, len(bs.stages) + 1)]


def replicate_frame(frame, shape) -> np.ndarray:
    """Pixel replication of ``frame`` by the integer factor reaching ``shape``."""
    frame = as_image(frame)
    q = shape[0] // frame.shape[0]
    if q < 1 or frame.shape[0] * q != shape[0] or frame.shape[1] * q != shape[1]:
        raise ParameterError(f"{frame.shape} does not tile {tuple(shape)}")
    return dg.upsample_replicate(frame, q)


@dataclass
class SuperResResult:
    frames: List[np.ndarray]
    aligned: List[np.ndarray]
    estimates: List[RegistrationEstimate]
    stream: StagedBitstream
    stage_images: List[np.ndarray]
    reconstruction: np.ndarray
    stage_mse: List[float]
    metrics: Optional[MetricsReport] = None
    baseline_psnr: Optional[float] = None
    baseline_frame: Optional[int] = None
    extras: dict = field(default_factory=dict)

    def report(self) -> dict:
        out = {
            "width": int(self.reconstruction.shape[1]),
            "height": int(self.reconstruction.shape[0]),
            "stage_mse": self.stage_mse,
            "registration": [dict(frame=i, **e.as_dict()) for i, e in enumerate(self.estimates)],
        }
        if self.metrics is not None:
            out.update(self.metrics.as_dict())
            out["baseline_psnr"] = self.baseline_psnr
            out["baseline_frame"] = self.baseline_frame
        return out


def superres(
    reference,
    params: Sequence[dg.DegradationParams],
    mask: ZonalMask = zonal_mask("triangle10"),
    ibd: Optional[IbdConfig] = IbdConfig(),
    interp: InterpConfig = InterpConfig(),
    factor: int = 2,
    order: str = dg.BLUR_FIRST,
    ssim_mode: str = "paper",
) -> SuperResResult:
    """Degrade, register, encode, decode and score in one pass.

    Metrics are computed when the reference can be brought onto the
    reconstruction grid; the baseline is pixel replication of the single
    frame scoring best.
    """
    reference = as_image(reference)
    frames = dg.simulate(reference, params, order)
    aligned, estimates = register_frames(frames)
    stream = encode_frames(aligned, mask, ibd, [estimate_noise_sigma(f) for f in frames])
    recon, stage_images = decode_stream(stream, None, factor, interp)
    result = SuperResResult(
        frames=frames,
        aligned=aligned,
        estimates=estimates,
        stream=stream,
        stage_images=stage_images,
        reconstruction=recon,
        stage_mse=stage_mse_curve(stream),
    )
    try:
        result.metrics = evaluate(reference, frames[0], recon, ssim_mode)
    except ParameterError:
        return result
    if all(reference.shape[0] % f.shape[0] == 0 and reference.shape[1] % f.shape[1] == 0 for f in frames):
        scores = [psnr(reference, replicate_frame(f, reference.shape)) for f in frames]
        best = int(np.argmax(scores))
        result.baseline_psnr, result.baseline_frame = scores[best], best
    return result
