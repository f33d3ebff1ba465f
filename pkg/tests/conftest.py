import numpy as np
import pytest

from sublorentz import (
    AbelianGroup,
    CarnotGroup,
    LorentzCone,
    LorentzSqrt,
    SolveOptions,
    heisenberg_algebra,
)

MINK = [[1.0, 0.0], [0.0, -1.0]]


@pytest.fixture
def mink_cone():
    return LorentzCone(MINK, [1.0, 0.0])


@pytest.fixture
def mink_nu():
    return LorentzSqrt(MINK)


@pytest.fixture
def plane():
    return AbelianGroup(2)


@pytest.fixture
def heis():
    return CarnotGroup(heisenberg_algebra())


@pytest.fixture
def light_opts():
    # enough for desk-scale instances; acceptance uses its own budgets
    return SolveOptions(restarts=3, max_iter=60, inner_iter=40)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
