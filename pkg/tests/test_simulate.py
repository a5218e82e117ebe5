import math

import numpy as np
import pytest

from jcir.charfn import jcir_cf
from jcir.errors import ValidationError
from jcir.simulate import PathConfig, SkeletonChain, euler_path, exact_marginal_sample, mc_cf, skeleton_chain

from conftest import within_se


def test_path_config_validation():
    with pytest.raises(ValidationError):
        PathConfig(-1.0, 1.0, 0.1)
    with pytest.raises(ValidationError):
        PathConfig(1.0, 1.0, 2.0)
    assert PathConfig(1.0, 1.0, 0.3).n_steps == 4


def test_skeleton_rejects_negative_state():
    with pytest.raises(ValidationError):
        SkeletonChain(1.0, np.array([1.0, -0.1]))


def test_mc_cf_standard_error_matches_formula(rng):
    x = rng.normal(size=5000)
    v, se = mc_cf(x, 1j)
    assert se.real == pytest.approx(np.cos(x).std(ddof=1) / math.sqrt(x.size), rel=1e-6)
    assert v == pytest.approx(np.mean(np.exp(1j * x)))


def test_exact_sampler_cf(bajd_params, rng):
    x = exact_marginal_sample(1.0, 1.0, bajd_params, rng, 200_000)
    for u in (1j, 2j, -1.0):
        v, se = mc_cf(x, u)
        assert within_se(v, se, jcir_cf(1.0, 1.0, u, bajd_params).value)


def test_exact_sampler_vector_start(bajd_params, rng):
    x = exact_marginal_sample(0.5, np.array([0.0, 5.0]), bajd_params, rng)
    assert x.shape == (2,)


def test_euler_paths_shape_and_threads(bajd_params):
    cfg = PathConfig(1.0, 1.0, 0.1, seed=4, n_paths=70_000)
    one = euler_path(cfg, bajd_params, threads=1)
    two = euler_path(cfg, bajd_params, threads=2)
    assert one.states.shape == (70_000, 11)
    assert one.times[-1] == pytest.approx(1.0)
    np.testing.assert_array_equal(one.states, two.states)


def test_euler_mean_is_unbiased_for_linear_drift(bajd_params):
    cfg = PathConfig(1.0, 1.0, 0.05, seed=1, n_paths=100_000)
    x1 = euler_path(cfg, bajd_params).states[:, -1]
    # full truncation leaves E only weakly biased; compare against the exact mean with slack
    exact = 1.0 + (1.0 - 1.0) * math.exp(-1.0) + (1 - math.exp(-1.0))
    assert abs(x1.mean() - exact) <= 4 * x1.std() / math.sqrt(x1.size) + 0.02


def test_skeleton_chain_shape(bajd_params, rng):
    ch = skeleton_chain(2.0, 0.5, 6, bajd_params, rng, n_chains=100)
    assert ch.states.shape == (100, 7)
    assert np.all(ch.states[:, 0] == 2.0)
    single = skeleton_chain(2.0, 0.5, 6, bajd_params, rng)
    assert single.states.shape == (7,)
