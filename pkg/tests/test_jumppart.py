import math

import numpy as np
import pytest

from jcir import jumppart as jp
from jcir.charfn import z_cf
from jcir.errors import ValidationError
from jcir.model import InfiniteActivity, JcirParams, TemperedStableDensity
from jcir.simulate import mc_cf

from conftest import within_se

# mpmath quadrature of 1 - exp(-1 / expm1(s)) over [0, 1]
LAMBDA_POINT_MASS = 0.769613691084219585316165128134


def test_lambda_point_mass_oracle(point_params):
    assert jp.lambda_of_t(1.0, point_params) == pytest.approx(LAMBDA_POINT_MASS, rel=1e-10)


@pytest.mark.parametrize("t", [0.25, 1.0, 4.0])
def test_lambda_exponential_closed_form(bajd_params, t):
    # a = 1, sigma^2 = 2, unit rate, Exp(1) sizes: lambda(t) = 1 - e^{-t}
    assert jp.lambda_of_t(t, bajd_params) == pytest.approx(-math.expm1(-t), rel=1e-10)
    assert jp.c_lower(t, bajd_params) == pytest.approx(math.exp(math.expm1(-t)), rel=1e-10)


def test_zero_measure(cir_params):
    assert jp.lambda_of_t(1.0, cir_params) == 0.0
    assert jp.z_mean(1.0, cir_params) == 0.0
    assert np.all(jp.z_sample(1.0, cir_params, np.random.default_rng(0), 10) == 0.0)


def test_lambda_grows_in_t(bajd_params):
    vals = [jp.lambda_of_t(t, bajd_params) for t in (0.1, 0.5, 1.0, 3.0)]
    assert np.all(np.diff(vals) > 0)


def test_lambda_rejects_bad_time(bajd_params):
    with pytest.raises(ValidationError):
        jp.lambda_of_t(0.0, bajd_params)


def test_compound_cf_matches_closed_form(bajd_params, point_params):
    u = np.array([1j, 2j, 5j, -1.0])
    for p in (bajd_params, point_params):
        np.testing.assert_allclose(jp.z_cf_compound(1.0, u, p), z_cf(1.0, u, p), rtol=1e-8)


def test_summary_fields(bajd_params):
    s = jp.summary(1.0, bajd_params)
    assert s.c_t == pytest.approx(math.exp(-s.lambda_t))
    assert s.mean_z == pytest.approx(1.0 - math.exp(-1.0))


def test_sampler_zero_fraction_mean_and_cf(bajd_params, rng):
    zs = jp.CompoundPoissonZ(1.0, bajd_params)
    z = zs.sample(rng, 200_000)
    c = zs.c_t
    assert abs(np.mean(z == 0.0) - c) <= 4 * math.sqrt(c * (1 - c) / z.size)
    assert abs(z.mean() - jp.z_mean(1.0, bajd_params)) <= 4 * z.std() / math.sqrt(z.size)
    for u in (1j, -1.0):
        v, se = mc_cf(z, u)
        assert within_se(v, se, z_cf(1.0, u, bajd_params))


def test_rejection_acceptance_identity(point_params, rng):
    zs = jp.CompoundPoissonZ(1.0, point_params)
    zs.sample_rho(rng, 100_000)
    rate = zs.accepted / zs.proposed
    se = math.sqrt(zs.acceptance * (1 - zs.acceptance) / zs.proposed)
    assert abs(rate - zs.acceptance) <= 4 * se
    assert zs.acceptance == pytest.approx(LAMBDA_POINT_MASS, rel=1e-10)


def test_rho_has_no_atom(point_params, rng):
    assert np.all(jp.rho_sample(1.0, point_params, rng, 5000) > 0)


def test_truncated_infinite_activity_sampler(rng):
    p = JcirParams(1.0, 1.0, math.sqrt(2.0), InfiniteActivity(TemperedStableDensity(0.5, 0.5, 1.0), eps_trunc=1e-4))
    zs = jp.CompoundPoissonZ(0.5, p)
    z = zs.sample(rng, 20_000)
    assert np.all(z >= 0)
    bias = p.nu.truncation_bias(0.5)
    target = jp.z_mean(0.5, p)
    assert abs(z.mean() - target) <= 4 * z.std() / math.sqrt(z.size) + bias
