import math

import numpy as np
import pytest

from jcir import ergodicity as erg
from jcir.errors import NoiseFloorError, ValidationError
from jcir.model import InfiniteActivity, JcirParams

from conftest import within_se

# P_2(Y < 2) - P_3(Y < 2) for unit-rate gamma laws, by mpmath
TV_GAMMA_2_3 = 0.270670566473225383787998989945


def test_drift_constant_and_mean(bajd_params):
    assert erg.drift_constant(bajd_params) == pytest.approx(2.0)
    assert erg.analytic_mean(3.0, 1.0, bajd_params) == pytest.approx(3 * math.exp(-1) + 2 * (1 - math.exp(-1)))


def test_lyapunov_bound(bajd_params, rng):
    r = erg.lyapunov_check(5.0, 0.5, bajd_params, 50_000, rng)
    assert r.ok and r.analytic_mean <= r.bound


def test_drift_check(bajd_params, rng):
    r = erg.drift_check([0.0, 2.0, 20.0], 0.25, bajd_params, 20_000, rng)
    assert r.ok


def test_tv_distance_gamma_pair(rng):
    a = rng.gamma(2.0, size=200_000)
    b = rng.gamma(3.0, size=200_000)
    est, se = erg.tv_distance(a, b, rng=rng)
    assert se > 0
    assert abs(est - TV_GAMMA_2_3) <= 0.01


def test_tv_distance_identical_law_is_small(rng):
    a = rng.exponential(size=100_000)
    b = rng.exponential(size=100_000)
    est, _ = erg.tv_distance(a, b, bins="sturges", rng=rng)
    floor, _ = erg.null_tv_level(a, b.size, rng, bins="sturges")
    assert est < 0.02 and floor < 0.02


def test_invariant_sample_cf(bajd_params, rng):
    s = erg.invariant_sample(bajd_params, 20.0, 100_000, rng)
    emp, se, exact = erg.invariant_cf_check(s, bajd_params)
    assert all(within_se(emp[k], se[k], exact[k]) for k in range(exact.size))


def test_fit_line_exact():
    n = np.arange(10.0)
    icpt, slope, se, r2 = erg._fit_line(n, 2.0 - 0.3 * n)
    assert (icpt, slope) == pytest.approx((2.0, -0.3))
    assert r2 == pytest.approx(1.0)


def test_ergodic_fit_recovers_rate(cir_params, rng):
    reps = erg.ergodic_rate_fit([0.0, 10.0], 0.25, 40, cir_params, 30_000, rng)
    for r in reps:
        assert 0 < r.beta_hat < 1
        assert abs(r.beta_hat - math.exp(-0.25)) <= 4 * r.beta_se + 0.02
        assert r.lyapunov_ok


def test_fit_rejects_non_ergodic_measure(rng):
    p = JcirParams(1.0, 1.0, 1.0, InfiniteActivity(lambda x: np.where(x > 0, x**-1.5, 0.0)))
    with pytest.raises(ValidationError):
        erg.ergodic_rate_fit([0.0], 0.25, 10, p, 1000, rng)


def test_fit_raises_below_noise_floor(cir_params, rng):
    ref = erg.invariant_sample(cir_params, 20.0, 5000, rng)
    chains = np.tile(ref[:, None], (1, 6))
    with pytest.raises(NoiseFloorError):
        erg.fit_tv_series(0.0, 0.25, chains, ref, 0.05, rng, t_burn=0.0)
