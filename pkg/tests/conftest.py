import numpy as np
import pytest

from stratwave.grid import FieldState, Grid2D, PhysicalParams, rng_from_seed


@pytest.fixture
def params():
    return PhysicalParams(g=2.0, f=0.7, N=1.3)


@pytest.fixture
def grid():
    return Grid2D(32, 32)


@pytest.fixture
def rng():
    return rng_from_seed(1234)


@pytest.fixture
def random_state(grid, rng):
    return FieldState.random(grid, rng)


def max_abs(a):
    return float(np.max(np.abs(a)))
