import numpy as np
import pytest

from bolab.field import Grid1D, SampledField


@pytest.fixture(scope="session")
def grid200():
    return Grid1D.centered(200.0, 4096)


@pytest.fixture(scope="session")
def grid400():
    return Grid1D.centered(400.0, 8192)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def lorentz(grid, y=1.0, x0=0.0):
    return SampledField(grid, 2 * y / ((grid.x - x0) ** 2 + y**2))
