import os

import numpy as np
import pytest

from oscflow.core import make_grid, transform_forward
from oscflow.corpus import build_corpus

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CALIBRATION_PATH = os.path.join(REPO_ROOT, "calibration.json")


@pytest.fixture(scope="session")
def grid2():
    return make_grid(2, 64)


@pytest.fixture(scope="session")
def grid3():
    return make_grid(3, 32)


@pytest.fixture(scope="session")
def corpus2():
    return build_corpus(2)


@pytest.fixture(scope="session")
def calibration_path():
    assert os.path.exists(CALIBRATION_PATH), "frozen calibration.json missing"
    return CALIBRATION_PATH


@pytest.fixture()
def rng():
    return np.random.default_rng(7)


def random_real_field(grid, rng, m=1, smooth=1.0):
    """Band-limited random real field with smoothly decaying spectrum."""
    vals = rng.standard_normal((m,) + grid.shape)
    f = transform_forward(grid, vals)
    damp = np.exp(-smooth * grid.k_abs**2 / grid.N)
    from oscflow.core import SpectralField

    return SpectralField(grid, f.coeffs * damp, real=True)
