import numpy as np
import pytest

from dormantwalk import ModelParams


@pytest.fixture
def base():
    """d = 1 with every rate equal to 1."""
    return ModelParams(d=1, kappa=1.0, rho=1.0, gamma=1.0, s0=1.0, s1=1.0)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(12345))
