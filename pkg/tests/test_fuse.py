import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dctsr.errors import ParameterError
from dctsr.fuse import fuse_max_frequency


def test_single_and_identical(rng):
    g = rng.normal(size=(2, 3, 8, 8))
    np.testing.assert_array_equal(fuse_max_frequency([g]), g)
    np.testing.assert_array_equal(fuse_max_frequency([g, g, g]), g)


def test_rule_example():
    a, b = np.zeros((1, 1, 8, 8)), np.zeros((1, 1, 8, 8))
    a[0, 0, 0, 1], b[0, 0, 0, 1] = 5, -9
    a[0, 0, 0, 0], b[0, 0, 0, 0] = 16, 24
    fused = fuse_max_frequency([a, b])
    assert fused[0, 0, 0, 1] == -9
    assert fused[0, 0, 0, 0] == 20


def test_equal_magnitude_tie_is_order_free():
    a, b = np.zeros((1, 1, 8, 8)), np.zeros((1, 1, 8, 8))
    a[0, 0, 2, 2], b[0, 0, 2, 2] = -4, 4
    assert fuse_max_frequency([a, b])[0, 0, 2, 2] == fuse_max_frequency([b, a])[0, 0, 2, 2] == 4


def test_errors(rng):
    with pytest.raises(ParameterError):
        fuse_max_frequency([])
    with pytest.raises(ParameterError):
        fuse_max_frequency([np.zeros((1, 1, 8, 8)), np.zeros((1, 2, 8, 8))])


@settings(max_examples=50, deadline=None)
@given(p=st.integers(1, 4), seed=st.integers(0, 10**6))
def test_properties(p, seed):
    r = np.random.default_rng(seed)
    # integer values make ties likely
    grids = [r.integers(-3, 4, size=(2, 2, 8, 8)).astype(float) for _ in range(p)]
    fused = fuse_max_frequency(grids)
    stack = np.stack(grids)
    np.testing.assert_allclose(fused[..., 0, 0], stack[..., 0, 0].mean(axis=0), atol=1e-12)
    ac = np.ones((8, 8), bool)
    ac[0, 0] = False
    np.testing.assert_array_equal(np.abs(fused)[..., ac], np.abs(stack).max(axis=0)[..., ac])
    for perm in itertools.permutations(range(p)):
        np.testing.assert_allclose(fuse_max_frequency([grids[i] for i in perm]), fused, atol=1e-12)
    np.testing.assert_allclose(fuse_max_frequency(grids + grids), fused, atol=1e-12)
