"""Image representation, binary PGM I/O and 8x8 block partitioning.

Images are plain ``numpy`` float64 arrays of shape ``(height, width)``.
Samples may leave [0, 255] between stages; quantization happens only in
:func:`save_pgm`.  Block grids are arrays of shape
``(blocks_h, blocks_w, 8, 8)`` in raster order.
"""
from __future__ import annotations

import os
import re

import numpy as np

from .errors import BoundsError, FormatError, ParameterError

BLOCK = 8

_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def as_image(data) -> np.ndarray:
    """Coerce array-like input to a finite 2-D float64 image."""
    img = np.asarray(data, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ParameterError(f"image must be a non-empty 2-D array, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ParameterError("image contains non-finite samples")
    return img


def _read_header(data: bytes):
    pos = 0
    fields = []
    for name in ("magic", "width", "height", "maxval"):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise FormatError(f"PGM header truncated: missing {name}")
        fields.append(m.group(1))
        pos = m.end()
    # exactly one whitespace byte separates maxval from the raster
    if pos >= len(data) or data[pos : pos + 1] not in (b" ", b"\t", b"\n", b"\r"):
        raise FormatError("PGM header truncated: missing separator after maxval")
    return fields, pos + 1


def load_pgm(path) -> np.ndarray:
    """Read a binary (P5) 8-bit PGM file into a float64 image."""
    with open(path, "rb") as fh:
        data = fh.read()
    (magic, w, h, maxval), offset = _read_header(data)
    if magic != b"P5":
        raise FormatError(f"unsupported magic {magic.decode(errors='replace')!r}, expected 'P5'")
    try:
        width, height, maxv = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise FormatError(f"non-numeric header field: {exc}") from None
    if width < 1:
        raise FormatError(f"invalid width {width}")
    if height < 1:
        raise FormatError(f"invalid height {height}")
    if maxv != 255:
        raise FormatError(f"unsupported maxval {maxv}, expected 255")
    payload = data[offset : offset + width * height]
    if len(payload) < width * height:
        raise FormatError(
            f"truncated payload: expected {width * height} bytes, got {len(payload)}"
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width).astype(np.float64)


def quantize(img) -> np.ndarray:
    """Round half away from zero, then clamp to the 8-bit range."""
    img = np.asarray(img, dtype=np.float64)
    rounded = np.sign(img) * np.floor(np.abs(img) + 0.5)
    return np.clip(rounded, 0, 255).astype(np.uint8)


def save_pgm(img, path) -> None:
    img = as_image(img)
    height, width = img.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    with open(os.fspath(path), "wb") as fh:
        fh.write(header)
        fh.write(quantize(img).tobytes())


def pad_to_blocks(img) -> np.ndarray:
    """Edge-replicate right/bottom so both dimensions are multiples of 8."""
    img = as_image(img)
    h, w = img.shape
    ph, pw = (-h) % BLOCK, (-w) % BLOCK
    if ph or pw:
        img = np.pad(img, ((0, ph), (0, pw)), mode="edge")
    return img


def to_blocks(img) -> np.ndarray:
    """Split an image into a ``(blocks_h, blocks_w, 8, 8)`` tile grid."""
    padded = pad_to_blocks(img)
    bh, bw = padded.shape[0] // BLOCK, padded.shape[1] // BLOCK
    return padded.reshape(bh, BLOCK, bw, BLOCK).swapaxes(1, 2).copy()


def from_blocks(grid, out_w: int, out_h: int) -> np.ndarray:
    """Reassemble tiles raster-wise and crop to ``out_h x out_w``."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 4 or grid.shape[2:] != (BLOCK, BLOCK):
        raise ParameterError(f"block grid must have shape (bh, bw, 8, 8), got {grid.shape}")
    bh, bw = grid.shape[:2]
    if out_w < 1 or out_h < 1:
        raise ParameterError("output size must be positive")
    if out_w > BLOCK * bw or out_h > BLOCK * bh:
        raise BoundsError(
            f"crop {out_w}x{out_h} exceeds grid extent {BLOCK * bw}x{BLOCK * bh}"
        )
    full = grid.swapaxes(1, 2).reshape(bh * BLOCK, bw * BLOCK)
    return full[:out_h, :out_w].copy()
