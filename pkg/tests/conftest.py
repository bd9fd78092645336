import numpy as np
import pytest
from hypothesis import settings

from l1pred.models import make_normal, make_uniform_ball

settings.register_profile("l1pred", deadline=None, max_examples=40)
settings.load_profile("l1pred")


@pytest.fixture(scope="session")
def normal3():
    return make_normal(3, 1.0)


@pytest.fixture(scope="session")
def normal2():
    return make_normal(2, 1.0)


@pytest.fixture(scope="session")
def uniball3():
    return make_uniform_ball(3, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
