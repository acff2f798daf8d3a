import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dctsr.dctcodec import (
    MASK_KINDS,
    apply_zonal_mask,
    dct2_block,
    idct2_block,
    image_to_coefs,
    mask_from_code,
    masked_noise_shape,
    zigzag_order,
    zonal_filter,
    zonal_mask,
)
from dctsr.errors import ParameterError

blocks = arrays(np.float64, (8, 8), elements=st.floats(-1e3, 1e3, allow_nan=False))


def brute_dct(b):
    """Orthonormal DCT-II by the double basis sum."""
    out = np.zeros((8, 8))
    for u in range(8):
        for v in range(8):
            cu = math.sqrt(1 / 8) if u == 0 else math.sqrt(2 / 8)
            cv = math.sqrt(1 / 8) if v == 0 else math.sqrt(2 / 8)
            acc = 0.0
            for x in range(8):
                for y in range(8):
                    acc += (
                        b[x, y]
                        * math.cos((2 * x + 1) * u * math.pi / 16)
                        * math.cos((2 * y + 1) * v * math.pi / 16)
                    )
            out[u, v] = cu * cv * acc
    return out


def test_constant_and_zero_block():
    c = dct2_block(np.full((8, 8), 3.0))
    assert c[0, 0] == pytest.approx(24.0, abs=1e-12)
    c[0, 0] = 0
    assert np.abs(c).max() < 1e-12
    np.testing.assert_array_equal(dct2_block(np.zeros((8, 8))), 0)
    dc = np.zeros((8, 8))
    dc[0, 0] = 8 * 5.0
    np.testing.assert_allclose(idct2_block(dc), 5.0, atol=1e-12)


def test_matches_bruteforce(rng):
    for _ in range(5):
        b = rng.normal(size=(8, 8)) * 100
        np.testing.assert_allclose(dct2_block(b), brute_dct(b), atol=1e-10)


def test_single_ac_basis():
    c = np.zeros((8, 8))
    c[0, 1] = 1.0
    x = np.arange(8)
    expected = np.outer(np.full(8, math.sqrt(1 / 8)), math.sqrt(2 / 8) * np.cos((2 * x + 1) * math.pi / 16))
    np.testing.assert_allclose(idct2_block(c), expected, atol=1e-15)


def test_roundtrip_1000_blocks(rng):
    b = rng.normal(size=(1000, 8, 8)) * 100
    assert np.abs(idct2_block(dct2_block(b)) - b).max() < 1e-10


@settings(max_examples=100, deadline=None)
@given(blocks)
def test_parseval(b):
    c = dct2_block(b)
    assert abs(np.sum(c**2) - np.sum(b**2)) <= 1e-9 * max(1.0, np.sum(b**2))


def test_zigzag_prefix():
    assert zigzag_order()[:10] == ((0, 0), (0, 1), (1, 0), (2, 0), (1, 1), (0, 2), (0, 3), (1, 2), (2, 1), (3, 0))
    assert sorted(zigzag_order()) == [(r, c) for r in range(8) for c in range(8)]


@pytest.mark.parametrize("kind, n", [("triangle10", 10), ("square4x4", 16), ("rect6x4", 24), ("full", 64)])
def test_mask_sizes(kind, n):
    m = zonal_mask(kind)
    assert m.n_kept == n == int(m.keep.sum())
    assert m.stage_order[0] == (0, 0) and m.keep[0, 0]
    assert set(m.stage_order) == {tuple(p) for p in np.argwhere(m.keep)}
    zz = zigzag_order()
    assert [zz.index(p) for p in m.stage_order] == sorted(zz.index(p) for p in m.stage_order)
    assert mask_from_code(m.code) is m


def test_mask_shapes():
    assert {p for p in zonal_mask("triangle10").stage_order} == {(u, v) for u in range(4) for v in range(4) if u + v <= 3}
    rect = zonal_mask("rect6x4").keep
    assert rect[:6, :4].all() and rect.sum() == 24


def test_mask_errors():
    with pytest.raises(ParameterError):
        zonal_mask("circle")
    with pytest.raises(ParameterError):
        mask_from_code(len(MASK_KINDS))


def test_mask_application(rng):
    grid = rng.normal(size=(3, 4, 8, 8))
    np.testing.assert_array_equal(apply_zonal_mask(grid, zonal_mask("full")), grid)
    tri = apply_zonal_mask(grid, zonal_mask("triangle10"))
    assert (np.count_nonzero(tri, axis=(2, 3)) <= 10).all()
    np.testing.assert_array_equal(apply_zonal_mask(tri, zonal_mask("triangle10")), tri)


@pytest.mark.parametrize("kind", MASK_KINDS)
def test_mask_energy(rng, kind):
    m = zonal_mask(kind)
    grid = rng.normal(size=(2, 2, 8, 8))
    assert np.sum(apply_zonal_mask(grid, m) ** 2) <= np.sum(grid**2)
    inside = np.where(m.keep, grid, 0.0)
    assert np.sum(apply_zonal_mask(inside, m) ** 2) == np.sum(inside**2)


def test_denoising_on_smooth_blocks(rng):
    x = np.arange(8)
    wins = 0
    for _ in range(100):
        a, b, c = rng.uniform(-6, 6, size=3)
        clean = 128 + a * x[:, None] + b * x[None, :] + c * np.cos(np.pi * (x[:, None] + x[None, :]) / 14)
        noisy = clean + rng.normal(0, 15, size=(8, 8))
        out = zonal_filter(noisy, zonal_mask("triangle10"))
        wins += np.mean((out - clean) ** 2) < np.mean((noisy - clean) ** 2)
    assert wins >= 90


def test_image_to_coefs_pads(rng):
    img = rng.normal(size=(10, 13))
    assert image_to_coefs(img).shape == (2, 2, 8, 8)
    np.testing.assert_allclose(zonal_filter(img, zonal_mask("full")), img, atol=1e-10)


def test_masked_noise_shape_matches_simulation(rng):
    m = zonal_mask("square4x4")
    shape = masked_noise_shape(m, (16, 16))
    np.testing.assert_allclose(masked_noise_shape(zonal_mask("full"), (16, 16)), 1.0, atol=1e-12)
    acc = np.zeros((16, 16))
    trials = 4000
    for _ in range(trials):
        acc += np.abs(np.fft.fft2(zonal_filter(rng.normal(size=(16, 16)), m))) ** 2 / 256
    np.testing.assert_allclose(acc / trials, shape, atol=0.12)
    assert shape.mean() == pytest.approx(16 / 64)
