"""Sampling the JCIR process.

* exact fixed-time marginals: CIR draw plus an independent ``Z_t`` draw;
* full-truncation Euler paths with compound-Poisson jump increments;
* delta-skeleton chains built by iterating the exact marginal sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .cir import cir_sample
from .errors import ValidationError
from .jumppart import CompoundPoissonZ
from .model import JcirParams


@dataclass(frozen=True)
class PathConfig:
    x0: float
    horizon: float
    dt: float
    seed: int = 0
    n_paths: int = 1

    def __post_init__(self):
        if self.x0 < 0:
            raise ValidationError("x0 must be >= 0")
        if not self.horizon > 0:
            raise ValidationError("horizon must be > 0")
        if not (0 < self.dt <= self.horizon):
            raise ValidationError("dt must satisfy 0 < dt <= horizon")
        if self.n_paths < 1:
            raise ValidationError("n_paths must be >= 1")

    @property
    def n_steps(self):
        return int(math.ceil(self.horizon / self.dt - 1e-9))


@dataclass(frozen=True)
class EulerPaths:
    times: np.ndarray
    states: np.ndarray  # (n_paths, n_steps + 1)


@dataclass(frozen=True)
class SkeletonChain:
    delta: float
    states: np.ndarray  # (n_steps + 1,) or (n_chains, n_steps + 1)

    def __post_init__(self):
        if not self.delta > 0:
            raise ValidationError("delta must be > 0")
        if np.any(self.states < 0):
            raise ValidationError("skeleton states must be >= 0")


def exact_marginal_sample(t, x, p: JcirParams, rng, size=None, z_sampler=None):
    """Exact draws of ``X_t^x`` as ``Y_t^x + Z_t`` with independent summands.

    ``x`` may be an array of starting points. Pass a prebuilt
    :class:`CompoundPoissonZ` for repeated calls at the same ``t``.
    """
    if not t > 0:
        raise ValidationError(f"t must be > 0, got {t}")
    x = np.asarray(x, dtype=float)
    if size is None:
        size = x.shape
    y = cir_sample(t, x, p, rng, size)
    if p.nu.is_zero:
        return y
    if z_sampler is None:
        z_sampler = CompoundPoissonZ(t, p)
    n = int(np.prod(size)) if size != () else 1
    z = z_sampler.sample(rng, n).reshape(size)
    return y + z


def _euler_block(cfg: PathConfig, p: JcirParams, rng, n):
    steps = cfg.n_steps
    times = np.minimum(np.arange(steps + 1) * cfg.dt, cfg.horizon)
    dts = np.diff(times)
    nu = p.nu.sampling_measure()
    rate = nu.total_mass
    out = np.empty((n, steps + 1))
    x = np.full(n, float(cfg.x0))
    out[:, 0] = x
    for k, h in enumerate(dts):
        xp = np.maximum(x, 0.0)
        dw = rng.normal(0.0, math.sqrt(h), n)
        x = x + p.a * (p.theta - xp) * h + p.sigma * np.sqrt(xp) * dw
        if rate > 0:
            counts = rng.poisson(rate * h, n)
            total = int(counts.sum())
            if total:
                sizes = nu.sample_jumps(rng, total)
                x = x + np.bincount(np.repeat(np.arange(n), counts), weights=sizes, minlength=n)
        out[:, k + 1] = x
    return times, out


def euler_path(cfg: PathConfig, p: JcirParams, threads: int = 1) -> EulerPaths:
    """Full-truncation Euler scheme with compound-Poisson jump increments.

    ``X_{k+1} = X_k + a (theta - X_k^+) dt + sigma sqrt(X_k^+) dW + dJ``; the
    raw iterate is recorded. Jumps are exact for finite activity and
    truncated below ``eps_trunc`` otherwise. Paths are generated in blocks
    with one Philox stream per block keyed by ``(seed, "euler", block)``.
    """
    times = np.minimum(np.arange(cfg.n_steps + 1) * cfg.dt, cfg.horizon)
    states = rngmod.run_blocks(
        cfg.n_paths, cfg.seed, "euler", lambda g, a, b: _euler_block(cfg, p, g, b - a)[1], threads
    )
    return EulerPaths(times, states)


def skeleton_chain(x, delta, n_steps, p: JcirParams, rng, n_chains=None) -> SkeletonChain:
    """Chain ``eta_n = X_{n delta}`` driven by the exact transition sampler."""
    if not delta > 0:
        raise ValidationError("delta must be > 0")
    if x < 0:
        raise ValidationError("x must be >= 0")
    shape = () if n_chains is None else (n_chains,)
    zs = None if p.nu.is_zero else CompoundPoissonZ(delta, p)
    states = np.empty(shape + (n_steps + 1,))
    cur = np.full(shape, float(x))
    states[..., 0] = cur
    for k in range(n_steps):
        cur = exact_marginal_sample(delta, cur, p, rng, z_sampler=zs)
        states[..., k + 1] = cur
    return SkeletonChain(float(delta), states)


def mc_cf(samples, u):
    """Empirical characteristic function with jackknife standard errors.

    Returns ``(value, se)``; ``se`` carries the real-part error in its real
    component and the imaginary-part error in its imaginary component.
    """
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if n < 2:
        raise ValidationError("need at least two samples")
    uu = np.atleast_1d(np.asarray(u, dtype=complex))
    vals = np.empty(uu.shape, dtype=complex)
    ses = np.empty(uu.shape, dtype=complex)
    for i, ui in enumerate(uu.ravel()):
        e = np.exp(ui * x)
        total = e.sum()
        loo = (total - e) / (n - 1)
        vals.flat[i] = total / n
        c = loo - loo.mean()
        scale = (n - 1) / n
        ses.flat[i] = math.sqrt(scale * np.sum(c.real**2)) + 1j * math.sqrt(scale * np.sum(c.imag**2))
    if np.ndim(u) == 0:
        return complex(vals[0]), complex(ses[0])
    return vals, ses
