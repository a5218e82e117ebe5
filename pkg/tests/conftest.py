import math
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from jcir.model import ExponentialJumps, FiniteActivity, JcirParams, PointMasses

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("dev", deadline=None, max_examples=10)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))

SQRT2 = math.sqrt(2.0)


@pytest.fixture
def cir_params():
    """a = 1, sigma^2 = 2, theta = 1, no jumps."""
    return JcirParams(1.0, 1.0, SQRT2)


@pytest.fixture
def bajd_params():
    """Same diffusion with unit-rate Exp(mean 1) jumps."""
    return JcirParams(1.0, 1.0, SQRT2, FiniteActivity(1.0, ExponentialJumps(1.0)))


@pytest.fixture
def point_params():
    return JcirParams(1.0, 0.0, SQRT2, PointMasses([(1.0, 1.0)]))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def within_se(est, se, target, k=4.0):
    """``|est - target| <= k se`` componentwise for complex values."""
    est, se, target = complex(est), complex(se), complex(target)
    return abs(est.real - target.real) <= k * se.real + 1e-15 and abs(est.imag - target.imag) <= k * se.imag + 1e-15
