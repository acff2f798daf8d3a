"""FFT phase correlation for translation and log-polar correlation for rotation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.ndimage import map_coordinates

from .degrade import warp
from .errors import DegenerateInputError, ParameterError
from .imgcore import as_image

ANGLE_BINS = 360
INNER_RADIUS = 4.0


@dataclass(frozen=True)
class RegistrationEstimate:
    dx: int = 0
    dy: int = 0
    theta: float = 0.0
    peak: float = 1.0

    def as_dict(self) -> dict:
        return {"dx": self.dx, "dy": self.dy, "theta": self.theta, "peak": self.peak}


def _same_shape(ref: np.ndarray, img: np.ndarray) -> None:
    if ref.shape != img.shape:
        raise ParameterError(f"size mismatch: {ref.shape} vs {img.shape}")



def _cross_power(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, int]:
    """Normalized cross-power spectrum of ``b`` against ``a`` (peak at shift of b)."""
    prod = np.fft.fftn(b) * np.conj(np.fft.fftn(a))
    mag = np.abs(prod)
    tol = mag.max() * 1e-12
    keep = mag > tol
    R = np.zeros_like(prod)
    R[keep] = prod[keep] / mag[keep]
    return R, int(keep.sum())


def phase_correlate(ref, img) -> RegistrationEstimate:
    """Integer translation (dx, dy) such that ``img`` is ``ref`` shifted by it."""
    ref, img = as_image(ref), as_image(img)
    _same_shape(ref, img)
    if min(ref.shape) < 8:
        raise ParameterError(f"images must be at least 8x8, got {ref.shape}")
    if not np.any(ref) or not np.any(img):
        raise DegenerateInputError("all-zero input has no spectrum to correlate")
    R, nonzero = _cross_power(ref, img)
    r = np.real(np.fft.ifft2(R))
    iy, ix = np.unravel_index(int(np.argmax(r)), r.shape)
    h, w = r.shape
    dy = int(iy) - h if iy > h // 2 else int(iy)
    dx = int(ix) - w if ix > w // 2 else int(ix)
    # an exact shift concentrates every retained bin in the peak
    peak = float(r[iy, ix] * r.size / nonzero)
    return RegistrationEstimate(dx=dx, dy=dy, theta=0.0, peak=peak)


def _radial_hann(n: int) -> np.ndarray:
    c = (n - 1) / 2.0
    yy, xx = np.mgrid[0:n, 0:n]
    r = np.hypot(yy - c, xx - c) / (n / 2.0)
    return np.where(r < 1.0, 0.5 * (1.0 + np.cos(np.pi * r)), 0.0)


def log_polar_spectrum(img: np.ndarray) -> np.ndarray:
    """Log-magnitude spectrum resampled to (log-radius, angle) axes.

    Angles cover [0, 180) degrees in ``ANGLE_BINS`` steps (the magnitude
    spectrum of a real image is point-symmetric); radii run log-uniformly
    from ``INNER_RADIUS`` to Nyquist in ``n // 2`` steps.
    """
    n = img.shape[0]
    windowed = (img - img.mean()) * _radial_hann(n)
    mag = np.log1p(np.abs(np.fft.fftshift(np.fft.fft2(windowed))))
    centre = n // 2
    n_rad = n // 2
    radii = INNER_RADIUS * (centre / INNER_RADIUS) ** (np.arange(n_rad) / (n_rad - 1))
    angles = np.deg2rad(np.arange(ANGLE_BINS) * 180.0 / ANGLE_BINS)
    rows = centre + radii[:, None] * np.sin(angles)[None, :]
    cols = centre + radii[:, None] * np.cos(angles)[None, :]
    return map_coordinates(mag, [rows, cols], order=1, mode="wrap")


def estimate_rotation(ref, img) -> float:
    """Rotation in degrees, in (-90, 90], taking ``ref`` onto ``img``."""
    ref, img = as_image(ref), as_image(img)
    _same_shape(ref, img)
    if ref.shape[0] != ref.shape[1]:
        raise ParameterError(f"rotation estimation needs square images, got {ref.shape}")
    if np.ptp(ref) == 0 or np.ptp(img) == 0:
        raise DegenerateInputError("constant image has no orientation")
    lp_ref = log_polar_spectrum(ref)
    lp_img = log_polar_spectrum(img)
    # plain cross-correlation along the periodic angle axis, summed over radii;
    # whitening the pooled spectrum was less accurate on smooth and noisy inputs
    spec = np.fft.fft(lp_img, axis=1) * np.conj(np.fft.fft(lp_ref, axis=1))
    r = np.real(np.fft.ifft(spec.sum(axis=0)))
    k = int(np.argmax(r))
    theta = k * 180.0 / ANGLE_BINS
    if theta > 90.0:
        theta -= 180.0
    return float(theta)


def _square_crop(img: np.ndarray) -> np.ndarray:
    h, w = img.shape
    n = min(h, w)
    top, left = (h - n) // 2, (w - n) // 2
    return img[top : top + n, left : left + n]


def align(ref, img) -> Tuple[np.ndarray, RegistrationEstimate]:
    """Undo the rotation and translation taking ``ref`` onto ``img``.

    The forward model rotates, then translates; the translation is measured
    against the rotated reference so it comes out as an exact integer shift,
    then the input is shifted back and de-rotated.
    """
    ref, img = as_image(ref), as_image(img)
    _same_shape(ref, img)
    theta = estimate_rotation(_square_crop(ref), _square_crop(img))
    target = warp(ref, theta, 0, 0) if theta != 0 else ref
    shift = phase_correlate(target, img)
    aligned = np.roll(img, (-shift.dy, -shift.dx), axis=(0, 1))
    if theta != 0:
        aligned = warp(aligned, -theta, 0, 0)
    return aligned, RegistrationEstimate(dx=shift.dx, dy=shift.dy, theta=theta, peak=shift.peak)
