import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from morselab.delay import plateau_kernel
from morselab.system import CyclicSystemSpec, tanh_feedback

settings.register_profile("repo", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture
def main_system():
    return CyclicSystemSpec((tanh_feedback(-2.0, 2.0),), -1, 2.0)


@pytest.fixture
def main_kernel():
    return plateau_kernel(alpha0=1.0, alpha2=1.2, eps=0.05, width=0.2, r=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
