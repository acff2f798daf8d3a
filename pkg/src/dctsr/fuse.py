"""Coefficient-domain fusion of several block-DCT grids."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import ParameterError


def fuse_max_frequency(grids: Sequence[np.ndarray]) -> np.ndarray:
    """Average the DC terms and keep the largest-magnitude AC term per position.

    Equal magnitudes of opposite sign resolve to the positive value, so the
    result does not depend on frame order.
    """
    if len(grids) == 0:
        raise ParameterError("need at least one grid to fuse")
    shape = np.shape(grids[0])
    for i, g in enumerate(grids):
        if np.shape(g) != shape:
            raise ParameterError(f"grid {i} has shape {np.shape(g)}, expected {shape}")
    stack = np.asarray(grids, dtype=np.float64)
    if len(grids) == 1:
        return stack[0].copy()
    mag = np.abs(stack)
    top = mag.max(axis=0)
    # among frames attaining the top magnitude, take the largest value
    fused = np.where(mag == top, stack, -np.inf).max(axis=0)
    dc = stack[..., 0, 0]
    # offset form keeps identical inputs exact
    fused[..., 0, 0] = dc[0] + (dc - dc[0]).mean(axis=0)
    return fused
