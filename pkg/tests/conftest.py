import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from nilflow import _backend, presets  # noqa: E402
from nilflow.torus import SkewShiftParams  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def golden():
    return SkewShiftParams.create("golden", 0.0)


@pytest.fixture(scope="session")
def golden_beta():
    return SkewShiftParams.create("golden", 0.1)


@pytest.fixture(scope="session")
def silver():
    return SkewShiftParams.create("silver", 0.3)


@pytest.fixture(scope="session")
def nontrivial_roof(golden):
    return presets.roof("nontrivial", golden)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    prev = _backend.active()
    _backend.set_backend(request.param)
    yield request.param
    _backend.set_backend(prev)
