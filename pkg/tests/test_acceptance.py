"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""
import itertools
import math
import time

import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

from dctsr import degrade as dg
from dctsr.dctcodec import (
    DCT_MATRIX,
    MASK_KINDS,
    apply_zonal_mask,
    dct2_block,
    idct2_block,
    image_to_coefs,
    zonal_filter,
    zonal_mask,
)
from dctsr.deblur import ibd_restore
from dctsr.imgcore import save_pgm
from dctsr.interp import adaptive_interpolate
from dctsr.metrics import isnr, mse, mssim, psnr, psnr_from_mse, srf
from dctsr.pipeline import superres
from dctsr.progressive import StagedBitstream, decode_upto, encode
from dctsr.register import estimate_rotation, phase_correlate

pytestmark = pytest.mark.acceptance


@pytest.fixture
def verdict(capsys):
    def emit(n, title, ok, detail, elapsed=None):
        took = "" if elapsed is None else f" [{elapsed:.1f}s]"
        with capsys.disabled():
            print(f"\ncriterion {n} {title}: {'PASS' if ok else 'FAIL'} ({detail}){took}")
        assert ok, detail

    return emit


def basis_sum_dct(block):
    out = np.zeros((8, 8))
    for u, v in itertools.product(range(8), repeat=2):
        cu = math.sqrt(1 / 8) if u == 0 else math.sqrt(2 / 8)
        cv = math.sqrt(1 / 8) if v == 0 else math.sqrt(2 / 8)
        s = 0.0
        for x, y in itertools.product(range(8), repeat=2):
            s += block[x, y] * math.cos((2 * x + 1) * u * math.pi / 16) * math.cos((2 * y + 1) * v * math.pi / 16)
        out[u, v] = cu * cv * s
    return out


def test_1_transform_fidelity(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    blocks = rng.uniform(-255, 255, size=(10_000, 8, 8))
    coefs = DCT_MATRIX @ blocks @ DCT_MATRIX.T
    round_trip = max(np.max(np.abs(idct2_block(dct2_block(b)) - b)) for b in blocks)
    batched = np.max(np.abs(np.stack([dct2_block(b) for b in blocks[:200]]) - coefs[:200]))
    oracle = max(np.max(np.abs(dct2_block(b) - basis_sum_dct(b))) for b in blocks[:50])
    elapsed = time.perf_counter() - t0
    ok = round_trip < 1e-10 and oracle < 1e-10 and batched < 1e-10 and elapsed < 5
    verdict(1, "transform fidelity", ok, f"round trip {round_trip:.1e}, oracle {oracle:.1e}", elapsed)


def test_2_registration(verdict, texture):
    t0 = time.perf_counter()
    img = np.random.default_rng(2).uniform(0, 255, size=(16, 16))
    misses = 0
    for dy, dx in itertools.product(range(16), repeat=2):
        est = phase_correlate(img, np.roll(img, (dy, dx), axis=(0, 1)))
        want = (dx - 16 if dx > 8 else dx, dy - 16 if dy > 8 else dy)
        misses += (est.dx, est.dy) != want
    errors = {th: estimate_rotation(texture, dg.warp(texture, th)) - th for th in (-30, -20, -10, 10, 20, 30)}
    worst = max(abs(e) for e in errors.values())
    elapsed = time.perf_counter() - t0
    ok = misses == 0 and worst <= 1 and elapsed < 30
    verdict(2, "registration exactness", ok, f"shift misses {misses}/256, worst rotation error {worst:.2f} deg", elapsed)


def test_3_progressive_monotonicity(verdict):
    rng = np.random.default_rng(3)
    violations = 0
    for i in range(20):
        h, w = rng.integers(8, 72, size=2)
        img = gaussian_filter(rng.uniform(0, 255, size=(h, w)), rng.uniform(0, 3))
        mask = zonal_mask(MASK_KINDS[i % len(MASK_KINDS)])
        bs = StagedBitstream.from_bytes(encode(apply_zonal_mask(image_to_coefs(img), mask), mask, w, h).to_bytes())
        final = decode_upto(bs, bs.stage_count)
        curve = [mse(decode_upto(bs, k), final) for k in range(1, bs.stage_count + 1)]
        violations += sum(b > a for a, b in zip(curve, curve[1:]))
    verdict(3, "progressive monotonicity", violations == 0, f"{violations} violations over 20 streams")


def test_4_golden_bitstreams(verdict, tmp_path):
    from make_fixtures import GOLDEN, HERE, golden_stream

    bad = []
    for name, kind, w, h, seed in GOLDEN:
        data = (HERE / f"{name}.srp").read_bytes()
        bs = StagedBitstream.from_bytes(data)
        out = tmp_path / f"{name}.pgm"
        save_pgm(decode_upto(bs, bs.stage_count), out)
        if out.read_bytes() != (HERE / f"{name}.pgm").read_bytes():
            bad.append(f"{name} decode")
        if golden_stream(kind, w, h, seed).to_bytes() != data or bs.to_bytes() != data:
            bad.append(f"{name} encode")
    verdict(4, "golden bitstreams", not bad, ", ".join(bad) or f"{len(GOLDEN)} fixtures byte-exact")


def test_5_zonal_denoising(verdict, camera):
    noisy = dg.add_awgn(camera, 15, seed=5)
    filtered = zonal_filter(noisy, zonal_mask("triangle10"))
    gain = psnr(camera, filtered) - psnr(camera, noisy)
    verdict(5, "zonal denoising", gain >= 1, f"PSNR gain {gain:.2f} dB")


def test_6_blind_deconvolution(verdict, camera):
    blurred = dg.convolve_periodic(camera, dg.gaussian_psf(1.5, 9))
    clean = isnr(camera, blurred, ibd_restore(blurred)[0])
    noisy = []
    for seed in range(10):
        y = dg.add_awgn(blurred, 10, seed)
        noisy.append(isnr(camera, y, ibd_restore(y)[0]))
    wins = sum(v > 0 for v in noisy)
    ok = clean > 0 and wins >= 8
    verdict(6, "blind deconvolution", ok,
            f"noise-free ISNR {clean:.2f} dB, noisy ISNR > 0 in {wins}/10 (min {min(noisy):.2f} dB)")


def test_7_interpolator_exactness(verdict):
    yy, xx = np.mgrid[0:16, 0:20]
    ramp = 3.0 * xx + 5.0 * yy + 7.0
    up = adaptive_interpolate(ramp)
    Y, X = np.mgrid[0:31, 0:39] / 2.0
    ramp_err = np.max(np.abs(up - (3.0 * X + 5.0 * Y + 7.0)))
    rng = np.random.default_rng(7)
    changed = 0
    for _ in range(100):
        h, w = rng.integers(2, 40, size=2)
        img = rng.uniform(0, 255, size=(h, w))
        if rng.random() < 0.5:
            img = np.round(img / 32) * 32
        changed += not np.array_equal(adaptive_interpolate(img)[::2, ::2], img)
    ok = ramp_err < 1e-9 and changed == 0
    verdict(7, "interpolator exactness", ok, f"ramp error {ramp_err:.1e}, originals modified in {changed}/100")


CASE1 = """\
# three frames, motion blur length 7 at 10/20/30 degrees, q=2
blur=motion:7:10 q=2 sigma=10 seed=1
blur=motion:7:20 q=2 sigma=15 seed=2
blur=motion:7:30 q=2 sigma=20 seed=3
"""


def test_8_end_to_end(verdict, camera):
    t0 = time.perf_counter()
    res = superres(camera, dg.parse_profile(CASE1))
    elapsed = time.perf_counter() - t0
    lift = res.metrics.psnr - res.baseline_psnr
    ok = lift >= 1 and res.metrics.isnr > 0 and elapsed < 120
    verdict(8, "end-to-end super-resolution", ok,
            f"PSNR {res.metrics.psnr:.2f} vs replication {res.baseline_psnr:.2f} dB (+{lift:.2f}), "
            f"ISNR {res.metrics.isnr:.2f} dB", elapsed)


def test_9_metric_identities(verdict):
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(50):
        f, y, g = (rng.uniform(0, 255, size=(32, 32)) for _ in range(3))
        worst = max(
            worst,
            abs(isnr(f, y, g) + isnr(f, g, y)),
            abs(srf(f, y, f)),
            abs(srf(f, y, y) - 1),
            abs(mssim(g, g) - 1),
            abs(mssim(g, g, "covariance") - 1),
            abs(psnr(f, g) - psnr_from_mse(mse(f, g))),
            abs(psnr(f, g) - 10 * math.log10(255**2 / np.mean((f - g) ** 2))),
        )
    verdict(9, "metric identities", worst < 1e-9, f"worst deviation {worst:.1e}")
