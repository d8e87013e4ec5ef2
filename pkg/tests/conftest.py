import numpy as np
import pytest

from attractor_forge import SpatialGrid, TripleSpec


@pytest.fixture
def grid():
    return SpatialGrid(100, 1.0)


@pytest.fixture
def fine_grid():
    return SpatialGrid(200, 1.0)


@pytest.fixture
def scalar_grid():
    # two interior nodes with 2h = 1: constant fields behave like scalars
    # (H-norm of the constant c is exactly |c|) while n_interior >= 2 holds.
    return SpatialGrid(2, 1.5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ALL_TRIPLES = {
    "RDE": TripleSpec.rde(),
    "PME": TripleSpec.pme(3.0),
    "PLE": TripleSpec.ple(4.0),
    "POINTWISE": TripleSpec.pointwise(4.0),
}
