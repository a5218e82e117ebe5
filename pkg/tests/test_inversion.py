import math

import numpy as np
import pytest

from jcir.cir import cir_density
from jcir.errors import ValidationError
from jcir.inversion import InversionConfig, default_grid, density_from_cf, lower_bound_check, span, z_variance
from jcir.jumppart import z_mean
from jcir.model import JcirParams


def test_z_variance_against_exponential_fixture(bajd_params, rng):
    from jcir.jumppart import z_sample

    z = z_sample(1.0, bajd_params, rng, 200_000)
    v = z_variance(1.0, bajd_params)
    # sample variance SE ~ sqrt((m4 - v^2) / n)
    se = math.sqrt(np.mean((z - z.mean()) ** 4) - z.var()) / math.sqrt(z.size)
    assert abs(z.var() - v) <= 4 * se


def test_span_covers_mean(bajd_params):
    b = span(1.0, 10.0, bajd_params)
    assert b > 10.0 * math.exp(-1.0) + 1.0 + z_mean(1.0, bajd_params)


@pytest.mark.parametrize("t, x", [(0.25, 0.0), (1.0, 1.0), (4.0, 10.0)])
def test_no_jumps_reduces_to_cir_density(cir_params, t, x):
    y = default_grid(t, x, cir_params, 200)
    g = density_from_cf(t, x, y, cir_params)
    np.testing.assert_array_equal(g.p_values, cir_density(t, x, y, cir_params))
    # mass on [0, b]: the span leaves tol_mass / 100 in the tail
    assert g.mass == pytest.approx(1.0, abs=2e-8)
    assert g.c_t == 1.0


def test_plain_cos_matches_cir_density_away_from_origin(cir_params):
    y = np.linspace(0.5, 5.0, 10)
    g = density_from_cf(1.0, 1.0, y, cir_params, InversionConfig(split_atom=False))
    np.testing.assert_allclose(g.p_values, cir_density(1.0, 1.0, y, cir_params), atol=1e-5)


def test_bajd_density_mass_and_mean(bajd_params):
    y = default_grid(1.0, 1.0, bajd_params, 200)
    g = density_from_cf(1.0, 1.0, y, bajd_params)
    assert g.mass == pytest.approx(1.0, abs=1e-6)
    mean = 1.0 * math.exp(-1.0) + (1 - math.exp(-1.0)) * 2.0
    assert g.mean == pytest.approx(mean, abs=1e-5)
    assert 0 < g.inv_error_bound < 1e-3


@pytest.mark.parametrize("t", [0.25, 1.0, 4.0])
@pytest.mark.parametrize("x", [0.0, 1.0, 10.0])
def test_bajd_lower_bound_holds(bajd_params, t, x):
    rep = lower_bound_check(t, x, None, bajd_params, tol=1e-6)
    assert rep.violations == 0
    assert rep.c_t == pytest.approx(math.exp(math.expm1(-t)), rel=1e-10)


def test_zero_measure_margin_is_zero(cir_params):
    rep = lower_bound_check(1.0, 1.0, None, cir_params)
    assert np.max(np.abs(rep.margin)) <= 1e-10


def test_density_needs_positive_theta(point_params):
    with pytest.raises(ValidationError):
        density_from_cf(1.0, 1.0, np.array([1.0]), point_params)


def test_nonnegative_grid_required(cir_params):
    with pytest.raises(ValidationError):
        density_from_cf(1.0, 1.0, np.array([-1.0]), cir_params)
