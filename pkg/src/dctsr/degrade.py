"""Forward observation model: warp, periodic blur, decimation and AWGN.

Angles follow array coordinates (x = column, y = row, y pointing down):
a positive angle turns the +x axis toward +y, which is clockwise on screen.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Sequence

import numpy as np

from .errors import ParameterError
from .imgcore import as_image

BLUR_FIRST = "blur-first"
DECIMATE_FIRST = "decimate-first"


def _normalized(taps: np.ndarray) -> np.ndarray:
    taps = np.asarray(taps, dtype=np.float64)
    if taps.ndim != 2 or taps.shape[0] != taps.shape[1] or taps.shape[0] % 2 == 0:
        raise ParameterError(f"PSF must be square with odd side, got shape {taps.shape}")
    if np.any(taps < 0):
        raise ParameterError("PSF taps must be non-negative")
    total = taps.sum()
    if total <= 0:
        raise ParameterError("PSF taps sum to zero")
    return taps / total


def delta_psf(size: int = 1) -> np.ndarray:
    if size < 1 or size % 2 == 0:
        raise ParameterError(f"PSF size must be a positive odd integer, got {size}")
    taps = np.zeros((size, size))
    taps[size // 2, size // 2] = 1.0
    return taps


def gaussian_psf(sigma: float, size: int) -> np.ndarray:
    """Sampled isotropic Gaussian on a ``size x size`` grid, summing to 1."""
    if sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    if size < 1 or size % 2 == 0:
        raise ParameterError(f"PSF size must be a positive odd integer, got {size}")
    r = np.arange(size) - size // 2
    g = np.exp(-(r[:, None] ** 2 + r[None, :] ** 2) / (2.0 * sigma**2))
    return g / g.sum()


def motion_psf(length: int, angle_deg: float) -> np.ndarray:
    """Linear motion blur of ``length`` samples along ``angle_deg``.

    Samples are placed at unit steps along the dominant axis; the fractional
    minor-axis coordinate is split linearly between the two nearest taps.
    """
    if length < 1:
        raise ParameterError(f"motion length must be >= 1, got {length}")
    theta = np.deg2rad(angle_deg)
    c, s = np.cos(theta), np.sin(theta)
    t = np.arange(length) - (length - 1) / 2.0
    if abs(c) >= abs(s):
        xs, ys = t * np.sign(c), t * np.sign(c) * s / c
    else:
        ys, xs = t * np.sign(s), t * np.sign(s) * c / s
    half = int(np.ceil(max(np.abs(xs).max(), np.abs(ys).max()))) + 1
    size = 2 * half + 1
    taps = np.zeros((size, size))
    for x, y in zip(xs, ys):
        x0, y0 = int(np.floor(x)), int(np.floor(y))
        fx, fy = x - x0, y - y0
        for dy, wy in ((0, 1 - fy), (1, fy)):
            for dx, wx in ((0, 1 - fx), (1, fx)):
                w = wx * wy
                if w > 1e-12:
                    taps[half + y0 + dy, half + x0 + dx] += w
    return _trim(taps / taps.sum())


def _trim(taps: np.ndarray) -> np.ndarray:
    """Drop all-zero outer rings while keeping the kernel centered."""
    n = taps.shape[0] // 2
    while n > 0:
        ring = taps.copy()
        ring[1:-1, 1:-1] = 0
        if np.any(ring):
            break
        taps = taps[1:-1, 1:-1]
        n -= 1
    return taps


def warp(img, theta: float = 0.0, dx: float = 0.0, dy: float = 0.0) -> np.ndarray:
    """Rotate about the image center by ``theta`` degrees, then shift by (dx, dy).

    Both steps wrap periodically; non-integer source positions are sampled
    bilinearly.  Integer shifts without rotation are exact circular shifts.
    """
    img = as_image(img)
    h, w = img.shape
    if theta == 0 and float(dx).is_integer() and float(dy).is_integer():
        return np.roll(img, (int(dy), int(dx)), axis=(0, 1))
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    # translation acts last, so wrap it before undoing the rotation
    u, v = (xx - dx) % w - cx, (yy - dy) % h - cy
    t = np.deg2rad(theta)
    c, s = np.cos(t), np.sin(t)
    # inverse rotation maps each output pixel back into the source
    sx = c * u + s * v + cx
    sy = -s * u + c * v + cy
    return _bilinear_periodic(img, sx, sy)


def _bilinear_periodic(img: np.ndarray, sx: np.ndarray, sy: np.ndarray) -> np.ndarray:
    h, w = img.shape
    # snap coordinates within rounding noise of the grid
    sx = np.where(np.abs(sx - np.rint(sx)) < 1e-9, np.rint(sx), sx)
    sy = np.where(np.abs(sy - np.rint(sy)) < 1e-9, np.rint(sy), sy)
    x0, y0 = np.floor(sx), np.floor(sy)
    fx, fy = sx - x0, sy - y0
    x0 = x0.astype(np.int64) % w
    y0 = y0.astype(np.int64) % h
    x1, y1 = (x0 + 1) % w, (y0 + 1) % h
    return (
        img[y0, x0] * (1 - fx) * (1 - fy)
        + img[y0, x1] * fx * (1 - fy)
        + img[y1, x0] * (1 - fx) * fy
        + img[y1, x1] * fx * fy
    )


def psf_transfer(psf, shape) -> np.ndarray:
    """FFT of a centered PSF embedded (with wraparound) in an array of ``shape``."""
    psf = np.asarray(psf, dtype=np.float64)
    h, w = shape
    k = psf.shape[0]
    c = k // 2
    kernel = np.zeros(shape)
    rows = (np.arange(k) - c) % h
    cols = (np.arange(k) - c) % w
    np.add.at(kernel, (rows[:, None], cols[None, :]), psf)
    return np.fft.fft2(kernel)


def convolve_periodic(img, psf) -> np.ndarray:
    """Circular 2-D convolution of ``img`` with a centered kernel."""
    img = as_image(img)
    psf = np.asarray(psf, dtype=np.float64)
    c = psf.shape[0] // 2
    if np.count_nonzero(psf) == 1 and psf[c, c] == 1.0:
        # centered delta: skip FFT round-off
        return img.copy()
    return np.real(np.fft.ifft2(np.fft.fft2(img) * psf_transfer(psf, img.shape)))


def downsample(img, q: int) -> np.ndarray:
    """Average each ``q x q`` cell into one sample."""
    img = as_image(img)
    if q < 1:
        raise ParameterError(f"decimation factor must be >= 1, got {q}")
    h, w = img.shape
    if h % q or w % q:
        raise ParameterError(f"image size {w}x{h} not divisible by q={q}")
    return img.reshape(h // q, q, w // q, q).mean(axis=(1, 3))


def upsample_replicate(img, q: int) -> np.ndarray:
    """Pixel replication by an integer factor."""
    img = as_image(img)
    return np.repeat(np.repeat(img, q, axis=0), q, axis=1)


def add_awgn(img, sigma: float, seed: int) -> np.ndarray:
    img = as_image(img)
    if sigma < 0:
        raise ParameterError(f"noise sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return img.copy()
    rng = np.random.default_rng(seed)
    return img + rng.normal(0.0, sigma, size=img.shape)


@dataclass(frozen=True)
class DegradationParams:
    theta: float = 0.0
    dx: float = 0.0
    dy: float = 0.0
    psf: np.ndarray = field(default_factory=delta_psf)
    q: int = 1
    noise_sigma: float = 0.0
    seed: int = 0
    blur: str = "none"

    def __post_init__(self):
        if self.q < 1:
            raise ParameterError(f"q must be >= 1, got {self.q}")
        if self.noise_sigma < 0:
            raise ParameterError(f"sigma must be >= 0, got {self.noise_sigma}")
        object.__setattr__(self, "psf", _normalized(self.psf))

    def to_profile_line(self) -> str:
        return (
            f"theta={self.theta:g} dx={self.dx:g} dy={self.dy:g} blur={self.blur} "
            f"q={self.q} sigma={self.noise_sigma:g} seed={self.seed}"
        )


def parse_blur(spec: str) -> np.ndarray:
    """Parse ``none``, ``gaussian:SIGMA:SIZE`` or ``motion:LENGTH:ANGLE``."""
    parts = spec.split(":")
    kind = parts[0].lower()
    try:
        if kind in ("none", "delta") and len(parts) == 1:
            return delta_psf()
        if kind == "gaussian" and len(parts) == 3:
            return gaussian_psf(float(parts[1]), int(parts[2]))
        if kind == "motion" and len(parts) == 3:
            return motion_psf(int(parts[1]), float(parts[2]))
    except ValueError as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ParameterError(f"bad blur spec {spec!r}: {exc}") from None
    raise ParameterError(f"unknown blur spec {spec!r}")


_KEYS = {"theta", "dx", "dy", "blur", "q", "sigma", "seed"}


def parse_profile_line(line: str) -> DegradationParams:
    """Parse one ``key=value`` profile line into :class:`DegradationParams`."""
    values = {}
    for token in line.split():
        key, sep, val = token.partition("=")
        if not sep or key not in _KEYS:
            raise ParameterError(f"bad profile token {token!r}")
        values[key] = val
    try:
        blur = values.get("blur", "none")
        return DegradationParams(
            theta=float(values.get("theta", 0)),
            dx=float(values.get("dx", 0)),
            dy=float(values.get("dy", 0)),
            psf=parse_blur(blur),
            q=int(values.get("q", 1)),
            noise_sigma=float(values.get("sigma", 0)),
            seed=int(values.get("seed", 0)),
            blur=blur,
        )
    except ValueError as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ParameterError(f"bad profile line {line!r}: {exc}") from None


def parse_profile(text: str) -> List[DegradationParams]:
    """One frame per non-empty line; ``#`` starts a comment."""
    frames = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            frames.append(parse_profile_line(line))
    if not frames:
        raise ParameterError("profile defines no frames")
    return frames


def load_profile(path) -> List[DegradationParams]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_profile(fh.read())


def degrade_frame(hr, p: DegradationParams, order: str = BLUR_FIRST) -> np.ndarray:
    out = warp(hr, p.theta, p.dx, p.dy)
    if order == BLUR_FIRST:
        out = downsample(convolve_periodic(out, p.psf), p.q)
    elif order == DECIMATE_FIRST:
        out = convolve_periodic(downsample(out, p.q), p.psf)
    else:
        raise ParameterError(f"unknown stage order {order!r}")
    return add_awgn(out, p.noise_sigma, p.seed)


def simulate(
    hr, params: Sequence[DegradationParams] | Iterable[DegradationParams], order: str = BLUR_FIRST
) -> List[np.ndarray]:
    """Generate one low-resolution frame per parameter set.

    Stages run warp -> blur -> decimate -> noise; ``order=DECIMATE_FIRST``
    swaps blur and decimation.
    """
    hr = as_image(hr)
    return [degrade_frame(hr, p, order) for p in params]
