"""Four-phase edge-adaptive 2x interpolation on a (2n-1) x (2m-1) lattice.

Original pixel (i, j) lands at (2i, 2j).  In a unit cell with corners
X1 (NW), X2 (NE), X3 (SW), X4 (SE) the undefined positions are the centre C
and the edge midpoints T, B, L, R.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .imgcore import as_image

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class InterpConfig:
    uniformity_threshold: float = 10.0
    edge_threshold: float = 10.0

    def __post_init__(self):
        if not (self.uniformity_threshold > 0 and self.edge_threshold > 0):
            raise ParameterError("interpolation thresholds must be > 0")


@dataclass
class SparseGrid:
    samples: np.ndarray
    defined: np.ndarray

    @property
    def shape(self):
        return self.samples.shape

    def copy(self) -> "SparseGrid":
        return SparseGrid(self.samples.copy(), self.defined.copy())


def expand_grid(img) -> SparseGrid:
    img = as_image(img)
    n, m = img.shape
    if n < 2 or m < 2:
        raise ParameterError(f"interpolation needs at least 2x2 pixels, got {m}x{n}")
    samples = np.zeros((2 * n - 1, 2 * m - 1))
    defined = np.zeros(samples.shape, dtype=bool)
    samples[::2, ::2] = img
    defined[::2, ::2] = True
    return SparseGrid(samples, defined)


def phase2_fill(grid: SparseGrid, cfg: InterpConfig = InterpConfig()) -> SparseGrid:
    """Fill cell centres and edge midpoints by the first matching rule.

    Rules, in order: uniform cell -> C is the corner mean; NW-SE diagonal
    similar (and NE-SW not) -> C from X1, X4; NE-SW similar -> C from X2, X3;
    both rows similar -> T and B; both columns similar -> L and R.
    """
    out = grid.copy()
    s, d = out.samples, out.defined
    x = s[::2, ::2]
    x1, x2, x3, x4 = x[:-1, :-1], x[:-1, 1:], x[1:, :-1], x[1:, 1:]
    t, e = cfg.uniformity_threshold, cfg.edge_threshold
    stack = np.stack([x1, x2, x3, x4])
    uniform = np.ptp(stack, axis=0) < t
    nwse = ~uniform & (np.abs(x1 - x4) < e) & (np.abs(x2 - x3) >= e)
    nesw = ~uniform & ~nwse & (np.abs(x2 - x3) < e)
    rest = ~(uniform | nwse | nesw)
    rows = rest & (np.abs(x1 - x2) < e) & (np.abs(x3 - x4) < e)
    cols = rest & ~rows & (np.abs(x1 - x3) < e) & (np.abs(x2 - x4) < e)

    centre = np.select(
        [uniform, nwse, nesw], [stack.mean(axis=0), (x1 + x4) / 2, (x2 + x3) / 2], 0.0
    )
    has_c = uniform | nwse | nesw
    cs, cd = s[1::2, 1::2], d[1::2, 1::2]
    cs[has_c] = centre[has_c]
    cd[has_c] = True

    # shared edge midpoints always receive the same pair mean from either cell
    ts, td = s[0:-1:2, 1::2], d[0:-1:2, 1::2]
    bs, bd = s[2::2, 1::2], d[2::2, 1::2]
    ts[rows] = ((x1 + x2) / 2)[rows]
    td[rows] = True
    bs[rows] = ((x3 + x4) / 2)[rows]
    bd[rows] = True
    ls, ld = s[1::2, 0:-1:2], d[1::2, 0:-1:2]
    rs, rd = s[1::2, 2::2], d[1::2, 2::2]
    ls[cols] = ((x1 + x3) / 2)[cols]
    ld[cols] = True
    rs[cols] = ((x2 + x4) / 2)[cols]
    rd[cols] = True

    if log.isEnabledFor(logging.DEBUG):
        undefined_before = np.count_nonzero(~grid.defined)
        filled = undefined_before - np.count_nonzero(~d)
        log.debug("phase 2 filled %d of %d undefined pixels", filled, undefined_before)
    return out


def _pair(s, d, a, b):
    (ya, xa), (yb, xb) = a, b
    h, w = s.shape
    if 0 <= ya < h and 0 <= xa < w and 0 <= yb < h and 0 <= xb < w and d[ya, xa] and d[yb, xb]:
        return s[ya, xa], s[yb, xb]
    return None


def phase3_fill(grid: SparseGrid, cfg: InterpConfig = InterpConfig()) -> SparseGrid:
    """Raster scan: average the primary neighbour pair if similar, else the other pair.

    For an edge midpoint the primary pair is the two original pixels it lies
    between and the secondary pair is perpendicular to them.  For a cell
    centre the primary pair is horizontal and the secondary vertical.
    """
    out = grid.copy()
    s, d = out.samples, out.defined
    e = cfg.edge_threshold
    for y, x in zip(*np.nonzero(~d)):
        horiz = ((y, x - 1), (y, x + 1))
        vert = ((y - 1, x), (y + 1, x))
        primary, secondary = (vert, horiz) if y % 2 == 1 and x % 2 == 0 else (horiz, vert)
        for a, b in (primary, secondary):
            p = _pair(s, d, a, b)
            if p is not None and abs(p[0] - p[1]) < e:
                s[y, x] = (p[0] + p[1]) / 2
                d[y, x] = True
                break
    return out


def _lower_median(values) -> float:
    v = sorted(values)
    return v[(len(v) - 1) // 2]


def phase4_fill(grid: SparseGrid) -> np.ndarray:
    """Fill what is left with the median of defined 3x3 neighbours.

    Each sweep reads only pixels defined before it started; sweeps repeat
    until every pixel is defined.
    """
    out = grid.copy()
    s, d = out.samples, out.defined
    while not d.all():
        known_s, known_d = s.copy(), d.copy()
        for y, x in zip(*np.nonzero(~known_d)):
            ys, xs = slice(max(y - 1, 0), y + 2), slice(max(x - 1, 0), x + 2)
            vals = known_s[ys, xs][known_d[ys, xs]]
            if vals.size:
                s[y, x] = _lower_median(vals)
                d[y, x] = True
        if np.array_equal(d, known_d):
            raise ParameterError("no defined pixels to propagate from")
    return s


def interpolate_once(img, cfg: InterpConfig = InterpConfig()) -> np.ndarray:
    grid = expand_grid(img)
    return phase4_fill(phase3_fill(phase2_fill(grid, cfg), cfg))


def adaptive_interpolate(img, factor: int = 2, cfg: InterpConfig = InterpConfig()) -> np.ndarray:
    """One (factor 2) or two (factor 4) rounds of the four-phase interpolator."""
    if factor not in (2, 4):
        raise ParameterError(f"factor must be 2 or 4, got {factor}")
    out = as_image(img)
    for _ in range(1 if factor == 2 else 2):
        out = interpolate_once(out, cfg)
    return out
