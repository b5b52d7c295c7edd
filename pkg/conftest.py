import numpy as np
import pytest

from bundleiso import dual_configuration
from clifford import build_clifford_system
from isoparametric import IsoparametricFamily, sample_point, sample_seed, tangent_projector
from shape import principal_decomposition

THETA = 0.3
TEST_SEED = 11


def draw(family, index=0, stream=0):
    return sample_point(family, sample_seed(TEST_SEED, index, stream))


def random_tangent(point, seed=0):
    rng = np.random.default_rng(seed)
    v = tangent_projector(point) @ rng.standard_normal(len(point.x))
    return v / np.linalg.norm(v)


@pytest.fixture(scope="session")
def family32():
    """m = 3, k = 2: multiplicities (3, 4) on R^16."""
    return IsoparametricFamily(build_clifford_system(3, 2), THETA)


@pytest.fixture(scope="session")
def family14():
    """m = 1, k = 4: multiplicities (1, 2) on R^8."""
    return IsoparametricFamily(build_clifford_system(1, 4), THETA)


@pytest.fixture(scope="session")
def point32(family32):
    return draw(family32)


@pytest.fixture(scope="session")
def data32(family32, point32):
    return principal_decomposition(family32, point32)


@pytest.fixture(scope="session")
def config34():
    return dual_configuration((3, 4), THETA)


@pytest.fixture(scope="session")
def point34(config34):
    return draw(config34.family, stream=1)


@pytest.fixture(scope="session")
def data34(config34, point34):
    return principal_decomposition(config34.family, point34)
