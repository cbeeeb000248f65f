import numpy as np
import pytest

from amcbo.objectives import make_problem


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def lame_linear():
    """Lame family with a straight-segment front (gamma = 1)."""
    return make_problem("lame", d=10, gamma=1.0)


@pytest.fixture(scope="session")
def lame_convex():
    return make_problem("lame", d=10, gamma=0.25)


@pytest.fixture(scope="session")
def do2dk_default():
    return make_problem("do2dk", d=10, k=2.0, s=1.0)
