"""Bessel distribution: an atom ``e^{-alpha}`` at zero plus the continuous part

    m(dx) = beta e^{-alpha - beta x} sqrt(alpha / (beta x)) I_1(2 sqrt(alpha beta x)) dx

with characteristic function ``exp(alpha u / (beta - u))``. This is the law of
a Poisson(alpha) number of independent Exponential(rate beta) summands, which
is how it is sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from .cir import log_bessel_iq
from .errors import ValidationError
from .model import JcirParams

_INVERSION_MAX_ALPHA = 30.0


@dataclass(frozen=True)
class BesselParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValidationError(f"Bessel parameters must be positive, got {self.alpha}, {self.beta}")


def from_time_jump(s, xi, p: JcirParams) -> BesselParams:
    """Parameters attached to a jump of size ``xi`` that happened ``s`` time units ago."""
    if not s > 0:
        raise ValidationError("elapsed time s must be > 0 (alpha diverges at s = 0)")
    if not xi > 0:
        raise ValidationError("jump size must be > 0")
    em1 = math.expm1(p.a * s)
    alpha = 2.0 * p.a * xi / (p.sigma2 * em1)
    beta = 2.0 * p.a * math.exp(p.a * s) / (p.sigma2 * em1)
    return BesselParams(alpha, beta)


def alpha_beta(s, xi, p: JcirParams):
    """Vectorized ``(alpha, beta)`` for arrays of elapsed times and jump sizes."""
    s = np.asarray(s, dtype=float)
    em1 = np.expm1(p.a * s)
    alpha = 2.0 * p.a * np.asarray(xi, dtype=float) / (p.sigma2 * em1)
    beta = 2.0 * p.a * np.exp(p.a * s) / (p.sigma2 * em1)
    return alpha, beta


def atom_mass(bp: BesselParams) -> float:
    return math.exp(-bp.alpha)


def pdf_continuous(bp: BesselParams, x):
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise ValidationError("x must be >= 0")
    a, b = bp.alpha, bp.beta
    out = np.empty_like(x_arr)
    pos = x_arr > 0
    xp = x_arr[pos]
    r = 2.0 * np.sqrt(a * b * xp)
    out[pos] = np.exp(math.log(b) - a - b * xp + 0.5 * (math.log(a) - np.log(b * xp)) + log_bessel_iq(1.0, r))
    # I_1(r) ~ r/2 at 0
    out[~pos] = a * b * math.exp(-a)
    return float(out) if np.ndim(x) == 0 else out


def cf(bp: BesselParams, u):
    u = np.asarray(u, dtype=complex)
    if np.any(u.real > 0):
        raise ValidationError("frequency must satisfy Re(u) <= 0")
    val = np.exp(bp.alpha * u / (bp.beta - u))
    return complex(val) if val.ndim == 0 else val


def mean(bp: BesselParams) -> float:
    return bp.alpha / bp.beta


def sample(bp: BesselParams, rng, size=None):
    """Poisson(alpha) many Exponential(beta) summands; zero summands give exactly 0."""
    n = rng.poisson(bp.alpha, size)
    return rng.gamma(n, 1.0 / bp.beta)


def zero_truncated_poisson(alpha, rng, size=None):
    """Poisson(alpha) conditioned on being >= 1; ``alpha`` may be an array.

    Sequential inversion for ``alpha <= 30``. Above that ``P(N = 0) < 1e-13``
    and plain Poisson draws with rejection of zeros are used.
    """
    alpha = np.asarray(alpha, dtype=float)
    shape = alpha.shape if size is None else size
    alpha = np.broadcast_to(alpha, shape)
    out = np.empty(shape, dtype=np.int64)
    small = alpha <= _INVERSION_MAX_ALPHA
    if np.any(small):
        out[small] = _ztp_inversion(alpha[small], rng)
    if np.any(~small):
        big = alpha[~small]
        draw = rng.poisson(big)
        bad = draw == 0
        while np.any(bad):
            draw[bad] = rng.poisson(big[bad])
            bad = draw == 0
        out[~small] = draw
    return out


def _ztp_inversion(alpha, rng):
    # P(N = k | N >= 1) = e^{-a} a^k / (k! (1 - e^{-a})), k >= 1
    u = rng.random(alpha.shape)
    k = np.ones(alpha.shape, dtype=np.int64)
    norm = -np.expm1(-alpha)
    prob = np.where(alpha > 0, alpha * np.exp(-alpha) / np.where(norm > 0, norm, 1.0), 1.0)
    # tiny alpha: the conditional law is concentrated on 1
    prob = np.where(alpha < 1e-12, 1.0, prob)
    cum = prob.copy()
    active = u > cum
    while np.any(active):
        k[active] += 1
        prob = np.where(active, prob * alpha / k, prob)
        cum = np.where(active, cum + prob, cum)
        new_active = active & (u > cum)
        # guard against round-off leaving u above a saturated CDF
        stuck = active & (prob < 1e-300)
        active = new_active & ~stuck
    return k


def sample_conditional_nonzero(bp: BesselParams, rng, size=None):
    """Draw from ``m / (1 - e^{-alpha})``: the number of summands is conditioned to be >= 1."""
    n = zero_truncated_poisson(bp.alpha, rng, size)
    return rng.gamma(n, 1.0 / bp.beta)


def sample_conditional_nonzero_vec(alpha, beta, rng):
    """Vectorized conditional draws for arrays of ``alpha`` and ``beta``."""
    n = zero_truncated_poisson(alpha, rng)
    return rng.gamma(n, 1.0 / np.asarray(beta, dtype=float))

