import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from piggyrepair.construct import fig3_fixture
from piggyrepair.gf import FieldCtx

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

SMALL_PRIMES = [2, 3, 5, 7, 11, 13]


@pytest.fixture(scope="session")
def gf7():
    return FieldCtx(7)


@pytest.fixture(scope="session")
def fig3():
    return fig3_fixture()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
