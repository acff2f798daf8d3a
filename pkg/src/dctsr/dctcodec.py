"""8x8 orthonormal block DCT and zonal coefficient masks."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from .errors import ParameterError
from .imgcore import BLOCK, as_image, from_blocks, to_blocks

MASK_KINDS = ("rect6x4", "square4x4", "triangle10", "full")
MASK_CODES = {kind: code for code, kind in enumerate(MASK_KINDS)}


def _dct_matrix(n: int = BLOCK) -> np.ndarray:
    k = np.arange(n)[:, None]
    x = np.arange(n)[None, :]
    c = np.sqrt(2.0 / n) * np.cos(np.pi * (2 * x + 1) * k / (2 * n))
    c[0, :] = np.sqrt(1.0 / n)
    return c


DCT_MATRIX = _dct_matrix()


def dct2_block(block) -> np.ndarray:
    """Orthonormal 2-D DCT-II of one block, or of every block in a stack."""
    b = np.asarray(block, dtype=np.float64)
    return DCT_MATRIX @ b @ DCT_MATRIX.T


def idct2_block(coefs) -> np.ndarray:
    c = np.asarray(coefs, dtype=np.float64)
    return DCT_MATRIX.T @ c @ DCT_MATRIX


def image_to_coefs(img) -> np.ndarray:
    """Partition (edge-padding to multiples of 8) and transform every block."""
    return dct2_block(to_blocks(img))


def coefs_to_image(grid, out_w: int, out_h: int) -> np.ndarray:
    return from_blocks(idct2_block(grid), out_w, out_h)


def zigzag_order(n: int = BLOCK) -> Tuple[Tuple[int, int], ...]:
    """JPEG zigzag scan as (row, col) pairs."""
    order = []
    for s in range(2 * n - 1):
        rows = range(max(0, s - n + 1), min(s, n - 1) + 1)
        if s % 2 == 0:
            rows = reversed(rows)
        order.extend((r, s - r) for r in rows)
    return tuple(order)


@dataclass(frozen=True)
class ZonalMask:
    """Binary keep pattern over (row, col) DCT positions plus its stage order."""

    kind: str
    keep: np.ndarray
    stage_order: Tuple[Tuple[int, int], ...]

    @property
    def code(self) -> int:
        return MASK_CODES[self.kind]

    @property
    def n_kept(self) -> int:
        return len(self.stage_order)


@lru_cache(maxsize=None)
def zonal_mask(kind: str) -> ZonalMask:
    rows, cols = np.mgrid[0:BLOCK, 0:BLOCK]
    if kind == "rect6x4":
        keep = (rows < 6) & (cols < 4)
    elif kind == "square4x4":
        keep = (rows < 4) & (cols < 4)
    elif kind == "triangle10":
        keep = rows + cols <= 3
    elif kind == "full":
        keep = np.ones((BLOCK, BLOCK), dtype=bool)
    else:
        raise ParameterError(f"unknown mask kind {kind!r}; choose from {', '.join(MASK_KINDS)}")
    keep.setflags(write=False)
    order = tuple(p for p in zigzag_order() if keep[p])
    return ZonalMask(kind=kind, keep=keep, stage_order=order)


def mask_from_code(code: int) -> ZonalMask:
    if not 0 <= code < len(MASK_KINDS):
        raise ParameterError(f"unknown mask code {code}")
    return zonal_mask(MASK_KINDS[code])


def apply_zonal_mask(grid, mask: ZonalMask) -> np.ndarray:
    """Zero every coefficient outside the mask's zone."""
    grid = np.asarray(grid, dtype=np.float64)
    return np.where(mask.keep, grid, 0.0)


def zonal_filter(img, mask: ZonalMask) -> np.ndarray:
    """Spatial-domain denoise: block DCT, mask, inverse DCT, crop."""
    img = as_image(img)
    h, w = img.shape
    return coefs_to_image(apply_zonal_mask(image_to_coefs(img), mask), w, h)


def masked_noise_shape(mask: ZonalMask, shape) -> np.ndarray:
    """Power spectrum of block-masked white noise relative to unmasked noise.

    Averaged over block positions, masked unit white noise has power
    ``mean over kept (u, v) of |DFT(basis_uv)|^2`` at each frequency; with
    the full mask this is identically 1.
    """
    h, w = shape
    out = np.zeros((h, w))
    for r, c in mask.stage_order:
        basis = np.zeros((h, w))
        basis[:BLOCK, :BLOCK] = np.outer(DCT_MATRIX[r], DCT_MATRIX[c])
        out += np.abs(np.fft.fft2(basis)) ** 2
    return out / (BLOCK * BLOCK)
