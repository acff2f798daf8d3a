import sys
from pathlib import Path

import numpy as np
import pytest

from dctsr.imgcore import load_pgm

DATA = Path(__file__).resolve().parent / "data"
# fixture generator doubles as the golden-file recipe
sys.path.insert(0, str(DATA))


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


@pytest.fixture(scope="session")
def camera():
    """256x256 natural test image (committed fixture)."""
    return load_pgm(DATA / "camera256.pgm")


@pytest.fixture(scope="session")
def texture():
    """Smooth random texture, 128x128, values in [0, 255]."""
    from scipy.ndimage import gaussian_filter

    noise = np.random.default_rng(7).normal(size=(128, 128))
    t = gaussian_filter(noise, 2.0, mode="wrap")
    t = (t - t.min()) / (t.max() - t.min())
    return 255.0 * t
