"""The pure-jump component ``Z_t`` as a compound Poisson law.

``Z_t`` has characteristic function ``exp(lambda(t) (rho_hat(u) - 1))`` where

    lambda(t) = int_0^t int (1 - e^{-alpha(s, xi)}) nu(dxi) ds
    rho       = (1 / lambda) int_0^t int m_{alpha(s, xi), beta(s)} nu(dxi) ds

and ``m`` is the continuous part of a Bessel distribution. Because ``rho`` has
no atom, ``P(Z_t = 0) = exp(-lambda(t))`` exactly; this is the constant
``C(t)`` of the transition-density lower bound.

Samplers work with ``nu.sampling_measure()``: for infinite-activity measures
this drops jumps below ``eps_trunc``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .besseldist import alpha_beta, sample_conditional_nonzero_vec
from .errors import QuadratureError, SamplingError, ValidationError
from .model import InfiniteActivity, JcirParams, check_admissible, first_moment

MIN_ACCEPTANCE = 1e-6
_MAX_BATCH = 1 << 21


@dataclass(frozen=True)
class JumpPartSummary:
    t: float
    lambda_t: float
    c_t: float
    mean_z: float


def sampling_params(p: JcirParams) -> JcirParams:
    """Parameters with ``nu`` replaced by its finite-mass sampling representation."""
    return p.with_nu(p.nu.sampling_measure())


@lru_cache(maxsize=64)
def _admissible_small_jumps(nu):
    return check_admissible(nu).lemma32_ok


def _jump_rate_scale(s, p):
    # alpha(s, xi) = scale(s) * xi
    return 2.0 * p.a / (p.sigma2 * np.expm1(p.a * s))


def lambda_of_t(t, p: JcirParams, quad_tol=1e-12):
    """Poisson rate ``lambda(t)`` of the compound-Poisson representation of ``Z_t``.

    The inner integral is ``-K(-alpha/xi)`` with ``K`` the Lévy exponent; it
    stays bounded by ``|nu|`` near ``s = 0`` for finite measures and grows
    integrably for infinite-activity ones.
    """
    if not t > 0:
        raise ValidationError(f"t must be > 0, got {t}")
    nu = p.nu
    if nu.is_zero:
        return 0.0
    if isinstance(nu, InfiniteActivity) and not _admissible_small_jumps(nu):
        raise ValidationError("lambda(t) needs int_0^1 xi ln(1/xi) nu(dxi) < inf")

    def inner(s):
        if s == 0.0:
            return nu.total_mass
        return -float(np.real(nu.levy_exponent(np.array([-_jump_rate_scale(s, p)]))[0]))

    val, err = integrate.quad(inner, 0.0, t, epsabs=quad_tol, epsrel=quad_tol, limit=500)
    if not math.isfinite(val) or err > 1e3 * quad_tol * max(1.0, abs(val)):
        raise QuadratureError(f"lambda({t}) quadrature did not converge (err={err:.3g}); check int xi ln(1/xi) nu < inf")
    return val


def c_lower(t, p: JcirParams, quad_tol=1e-12):
    """``C(t) = P(Z_t = 0) = exp(-lambda(t))``."""
    return math.exp(-lambda_of_t(t, p, quad_tol))


def z_mean(t, p: JcirParams):
    """``E[Z_t] = ((1 - e^{-at}) / a) int xi nu(dxi)``."""
    m1 = first_moment(p.nu)
    if m1 == 0.0:
        return 0.0
    return -math.expm1(-p.a * t) / p.a * m1


def summary(t, p: JcirParams, quad_tol=1e-12) -> JumpPartSummary:
    lam = lambda_of_t(t, p, quad_tol)
    return JumpPartSummary(t, lam, math.exp(-lam), z_mean(t, p))


def rho_cf(t, u, p: JcirParams, lam=None, quad_tol=1e-11):
    """``rho_hat(u) = (1/lambda) int_0^t int (e^{alpha u/(beta-u)} - e^{-alpha}) nu(dxi) ds``.

    Built from the Bessel parameters and the quadrature form of the Lévy
    exponent, independently of the closed-form path in ``charfn``.
    """
    uu = np.atleast_1d(np.asarray(u, dtype=complex)).ravel()
    nu = p.nu
    if lam is None:
        lam = lambda_of_t(t, p)
    if lam == 0.0:
        raise ValidationError("rho is undefined when lambda(t) = 0")

    def integrand(s):
        if s == 0.0:
            return np.full(uu.shape, nu.total_mass, dtype=complex) + nu.levy_exponent_quad(uu)
        scale = _jump_rate_scale(s, p)
        _, beta = alpha_beta(s, 1.0, p)
        w = scale * uu / (beta - uu)
        # int (e^{xi w} - e^{-xi scale}) nu(dxi) = K(w) - K(-scale)
        both = nu.levy_exponent_quad(np.concatenate([w, [-scale]]))
        return both[:-1] - both[-1]

    val, err = integrate.quad_vec(integrand, 0.0, t, epsabs=quad_tol, epsrel=quad_tol, limit=2000, norm="max")
    out = val / lam
    return complex(out[0]) if np.ndim(u) == 0 else out.reshape(np.shape(u))


def z_cf_compound(t, u, p: JcirParams):
    """``exp(lambda (rho_hat(u) - 1))``."""
    lam = lambda_of_t(t, p)
    if lam == 0.0:
        return np.ones(np.shape(u), dtype=complex) if np.ndim(u) else 1.0 + 0j
    return np.exp(lam * (rho_cf(t, u, p, lam) - 1.0))


class CompoundPoissonZ:
    """Fixed-``t`` sampler of ``Z_t`` and of the jump law ``rho``.

    Holds ``lambda(t)`` of the sampling measure and counts rejection-sampler
    proposals, so the acceptance identity ``lambda / (t |nu|)`` can be checked.
    """

    def __init__(self, t, p: JcirParams, quad_tol=1e-12):
        if not t > 0:
            raise ValidationError(f"t must be > 0, got {t}")
        self.t = float(t)
        self.params = sampling_params(p)
        self.measure = self.params.nu
        self.lambda_t = lambda_of_t(t, self.params, quad_tol)
        self.mass = self.measure.total_mass
        self.proposed = 0
        self.accepted = 0
        if self.mass > 0:
            acc = self.lambda_t / (self.t * self.mass)
            if acc < MIN_ACCEPTANCE:
                raise SamplingError(
                    f"rho rejection sampler acceptance {acc:.3g} < {MIN_ACCEPTANCE}; review a, sigma, nu and t"
                )
            self.acceptance = acc
        else:
            self.acceptance = 0.0

    @property
    def c_t(self):
        return math.exp(-self.lambda_t)

    def sample_rho(self, rng, size):
        if self.mass == 0:
            raise ValidationError("rho is undefined for the zero measure")
        out = np.empty(size)
        filled = 0
        while filled < size:
            need = size - filled
            batch = min(int(need / self.acceptance * 1.1) + 64, _MAX_BATCH)
            s = self.t * rng.random(batch)
            s = np.where(s == 0.0, self.t, s)
            xi = self.measure.sample_jumps(rng, batch)
            alpha, beta = alpha_beta(s, xi, self.params)
            keep = rng.random(batch) < -np.expm1(-alpha)
            self.proposed += batch
            n_keep = int(keep.sum())
            self.accepted += n_keep
            take = min(n_keep, need)
            a_k, b_k = alpha[keep][:take], beta[keep][:take]
            out[filled : filled + take] = sample_conditional_nonzero_vec(a_k, b_k, rng)
            filled += take
        return out

    def sample(self, rng, size):
        if self.lambda_t == 0.0:
            return np.zeros(size)
        n = rng.poisson(self.lambda_t, size)
        total = int(n.sum())
        jumps = self.sample_rho(rng, total)
        owner = np.repeat(np.arange(size), n)
        return np.bincount(owner, weights=jumps, minlength=size)


def rho_sample(t, p: JcirParams, rng, size=1):
    return CompoundPoissonZ(t, p).sample_rho(rng, size)


def z_sample(t, p: JcirParams, rng, size=1):
    """Exact draws of ``Z_t``: a Poisson(lambda(t)) number of ``rho`` draws."""
    return CompoundPoissonZ(t, p).sample(rng, size)
