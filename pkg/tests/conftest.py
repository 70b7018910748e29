import pytest

from knotforge.config import SynthOptions
from knotforge.fixtures import F1, F5, F_ALPHA, G1, G5, G_ALPHA
from knotforge.services.curve import double_points


@pytest.fixture(scope="session")
def trefoil_dps():
    return double_points(F1, G1)


@pytest.fixture(scope="session")
def fig8_dps():
    return double_points(F_ALPHA, G_ALPHA)


@pytest.fixture(scope="session")
def cinquefoil_dps():
    return double_points(F5, G5)


@pytest.fixture
def opts():
    return SynthOptions(workers=2)
