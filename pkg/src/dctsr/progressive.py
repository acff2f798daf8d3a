"""Staged coefficient bitstream: DC first, then one AC position per stage.

Wire layout (little-endian)::

    magic "SRPD" | version u8 | width u16 | height u16 | block u8 | mask u8 | stages u8
    per stage: index u8 | payload_len u32 | payload (float32 per block, raster order)
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .dctcodec import ZonalMask, idct2_block, mask_from_code
from .errors import ParameterError, StreamError
from .imgcore import BLOCK, from_blocks

MAGIC = b"SRPD"
VERSION = 1
HEADER = struct.Struct("<4sBHHBBB")
STAGE_HEADER = struct.Struct("<BI")


@dataclass
class StagedBitstream:
    width: int
    height: int
    mask: ZonalMask
    stages: List[np.ndarray] = field(default_factory=list)

    @property
    def blocks_w(self) -> int:
        return -(-self.width // BLOCK)

    @property
    def blocks_h(self) -> int:
        return -(-self.height // BLOCK)

    @property
    def stage_count(self) -> int:
        """Number of stages the mask defines (not necessarily all received)."""
        return self.mask.n_kept

    def to_bytes(self) -> bytes:
        out = [
            HEADER.pack(MAGIC, VERSION, self.width, self.height, BLOCK, self.mask.code, self.stage_count)
        ]
        for idx, coefs in enumerate(self.stages):
            payload = np.asarray(coefs, dtype="<f4").tobytes()
            out.append(STAGE_HEADER.pack(idx, len(payload)))
            out.append(payload)
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "StagedBitstream":
        """Parse a stream; trailing stages may be missing but not cut mid-stage."""
        bs, consumed = _parse(data)
        if consumed != len(data):
            raise StreamError("incomplete stage", offset=consumed)
        return bs


def _parse_header(data: bytes):
    if len(data) < HEADER.size:
        raise StreamError("truncated header", offset=len(data))
    magic, version, width, height, block, mask_code, stage_count = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise StreamError(f"bad magic {magic!r}", offset=0)
    if version != VERSION:
        raise StreamError(f"unsupported version {version}", offset=4)
    if width < 1 or height < 1:
        raise StreamError("zero image dimension", offset=5)
    if block != BLOCK:
        raise StreamError(f"unsupported block size {block}", offset=9)
    try:
        mask = mask_from_code(mask_code)
    except ParameterError:
        raise StreamError(f"unknown mask code {mask_code}", offset=10) from None
    if stage_count != mask.n_kept:
        raise StreamError(
            f"stage count {stage_count} does not match mask {mask.kind} ({mask.n_kept})", offset=11
        )
    return StagedBitstream(width, height, mask)


def _parse(data: bytes):
    """Parse as many complete stages as ``data`` holds.

    Returns the stream and the number of bytes consumed; a partial trailing
    stage is left unconsumed.  Structural errors raise :class:`StreamError`.
    """
    bs = _parse_header(data)
    n_blocks = bs.blocks_w * bs.blocks_h
    pos = HEADER.size
    while len(bs.stages) < bs.stage_count and pos + STAGE_HEADER.size <= len(data):
        idx, length = STAGE_HEADER.unpack_from(data, pos)
        if idx != len(bs.stages):
            raise StreamError(f"stage index {idx}, expected {len(bs.stages)}", offset=pos)
        if length != 4 * n_blocks:
            raise StreamError(f"stage payload {length} bytes, expected {4 * n_blocks}", offset=pos + 1)
        start = pos + STAGE_HEADER.size
        if start + length > len(data):
            break
        coefs = np.frombuffer(data, dtype="<f4", count=n_blocks, offset=start)
        bs.stages.append(coefs.astype(np.float32))
        pos = start + length
    return bs, pos


def encode(grid, mask: ZonalMask, out_w: int, out_h: int) -> StagedBitstream:
    """Split a masked coefficient grid into per-position stages."""
    grid = np.asarray(grid, dtype=np.float64)
    bh, bw = -(-out_h // BLOCK), -(-out_w // BLOCK)
    if grid.shape != (bh, bw, BLOCK, BLOCK):
        raise ParameterError(f"grid shape {grid.shape} does not match {out_w}x{out_h} image")
    if not (0 < out_w < 1 << 16 and 0 < out_h < 1 << 16):
        raise ParameterError(f"image size {out_w}x{out_h} does not fit the header")
    if np.any(grid[..., ~mask.keep]):
        raise ParameterError(f"grid has nonzero coefficients outside the {mask.kind} zone")
    stages = [grid[:, :, r, c].reshape(-1).astype(np.float32) for r, c in mask.stage_order]
    return StagedBitstream(out_w, out_h, mask, stages)


def stages_to_grid(bs: StagedBitstream, k: int) -> np.ndarray:
    grid = np.zeros((bs.blocks_h, bs.blocks_w, BLOCK, BLOCK))
    for (r, c), coefs in zip(bs.mask.stage_order[:k], bs.stages[:k]):
        grid[:, :, r, c] = np.asarray(coefs, dtype=np.float64).reshape(bs.blocks_h, bs.blocks_w)
    return grid


def decode_upto(bs: StagedBitstream, k: int) -> np.ndarray:
    """Reconstruct the image from the first ``k`` stages."""
    if not 1 <= k <= bs.stage_count:
        raise ParameterError(f"stage count k={k} outside 1..{bs.stage_count}")
    if k > len(bs.stages):
        raise ParameterError(f"only {len(bs.stages)} stages received, cannot decode {k}")
    return from_blocks(idct2_block(stages_to_grid(bs, k)), bs.width, bs.height)


class ProgressiveDecoder:
    """Incremental decoder: feed bytes as they arrive, poll for the best image."""

    def __init__(self):
        self._buf = bytearray()
        self._stream: Optional[StagedBitstream] = None

    def feed(self, chunk: bytes) -> int:
        """Buffer ``chunk``; returns the number of complete stages so far."""
        self._buf.extend(chunk)
        if len(self._buf) >= HEADER.size:
            self._stream, _ = _parse(bytes(self._buf))
        return self.stages_received

    @property
    def stages_received(self) -> int:
        return 0 if self._stream is None else len(self._stream.stages)

    @property
    def complete(self) -> bool:
        return self._stream is not None and self.stages_received == self._stream.stage_count

    def poll(self) -> Optional[np.ndarray]:
        """Image from every complete stage received, or None before the first."""
        if self.stages_received == 0:
            return None
        return decode_upto(self._stream, self.stages_received)
