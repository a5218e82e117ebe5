"""Classical CIR building blocks: modified Bessel function, transition density, exact sampler."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import ValidationError
from .model import JcirParams

R_SWITCH = 50.0
_SERIES_TOL = 1e-18
_ASYM_TERMS = 64


def _bessel_series_log(q, r):
    """``log I_q(r)`` for an array ``r > 0`` by the power series, summed in log space.

    Every term is positive for ``q > -1`` so there is no cancellation at any
    ``r``; the cost is about ``r/2 + 10 sqrt(r)`` terms.
    """
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    if r.size == 0:
        return out
    flat = r.ravel()
    res = out.ravel()
    order = np.argsort(flat)
    # chunk by magnitude so short series are not padded to the longest one
    for chunk in np.array_split(order, max(1, flat.size // 512)):
        rc = flat[chunk]
        rmax = float(rc.max())
        kpeak = 0.5 * rmax
        kmax = int(kpeak + 12.0 * math.sqrt(kpeak + 1.0) + 40)
        k = np.arange(1, kmax + 1, dtype=float)
        half = np.log(0.5 * rc)
        log_ratio = 2.0 * half[:, None] - np.log(k)[None, :] - np.log(k + q)[None, :]
        log_terms = np.concatenate([np.zeros((rc.size, 1)), np.cumsum(log_ratio, axis=1)], axis=1)
        top = log_terms.max(axis=1)
        s = np.exp(log_terms - top[:, None]).sum(axis=1)
        res[chunk] = q * half - gammaln(q + 1.0) + top + np.log(s)
    return out


def _bessel_asym(q, r):
    """Large-argument expansion: ``I_q(r) e^{-r} sqrt(2 pi r) ~ sum (-1)^k a_k(q) / r^k``."""
    r = np.asarray(r, dtype=float)
    mu = 4.0 * q * q
    term = np.ones_like(r)
    total = np.ones_like(r)
    for k in range(1, _ASYM_TERMS):
        term = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * r)
        total = total + term
        if np.all(np.abs(term) < 1e-17 * np.abs(total)):
            break
    return total / np.sqrt(2.0 * np.pi * r)


def bessel_iq(q, r, r_switch=R_SWITCH):
    """Modified Bessel function of the first kind in split form.

    Returns ``(value, exponent)`` with ``I_q(r) = value * exp(exponent)``.
    Power series for ``r <= r_switch``; the large-argument expansion beyond,
    as long as ``4 q^2 <= r`` (otherwise the series is used throughout).
    """
    if not q > -1.0:
        raise ValidationError(f"Bessel order must exceed -1, got {q}")
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ValidationError("Bessel argument must be >= 0")
    value = np.empty_like(r_arr)
    expo = np.zeros_like(r_arr)
    zero = r_arr == 0.0
    value[zero] = 1.0 if q == 0 else 0.0
    asym = (r_arr > r_switch) & (4.0 * q * q <= r_arr)
    ser = ~zero & ~asym
    if np.any(ser):
        value[ser] = 1.0
        expo[ser] = _bessel_series_log(q, r_arr[ser])
    if np.any(asym):
        value[asym] = _bessel_asym(q, r_arr[asym])
        expo[asym] = r_arr[asym]
    if np.ndim(r) == 0:
        return float(value), float(expo)
    return value, expo


def log_bessel_iq(q, r, r_switch=R_SWITCH):
    value, expo = bessel_iq(q, r, r_switch)
    with np.errstate(divide="ignore"):
        return np.log(value) + expo


@dataclass(frozen=True)
class CirGridConstants:
    kappa: float
    u_nc: float
    v_nc: np.ndarray
    q: float


def grid_constants(t, x, y, p: JcirParams) -> CirGridConstants:
    """The constants ``kappa``, ``u = kappa x e^{-at}``, ``v = kappa y`` and ``q``."""
    if not t > 0:
        raise ValidationError(f"t must be > 0, got {t}")
    kappa = 2.0 * p.a / (p.sigma2 * -math.expm1(-p.a * t))
    return CirGridConstants(kappa, kappa * x * math.exp(-p.a * t), kappa * np.asarray(y, dtype=float), p.shape - 1.0)


def cir_density(t, x, y, p: JcirParams):
    """Transition density ``f(t, x, y)`` of the CIR process (jumps ignored).

    For ``x = 0`` the non-central law degenerates to a gamma density with
    normalizing constant ``kappa``. At ``y = 0`` the value is the limit:
    0 for ``q > 0``, finite for ``q = 0`` and ``inf`` for ``q < 0``.
    """
    if not t > 0:
        raise ValidationError(f"t must be > 0, got {t}")
    if x < 0:
        raise ValidationError("x must be >= 0")
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < 0):
        raise ValidationError("y must be >= 0")
    g = grid_constants(t, x, y_arr, p)
    kappa, u, v, q = g.kappa, g.u_nc, g.v_nc, g.q
    out = np.empty_like(v)
    pos = v > 0
    vp = v[pos]
    if x == 0 or u == 0.0:
        out[pos] = np.exp(math.log(kappa) - gammaln(q + 1.0) + q * np.log(vp) - vp)
    else:
        logf = (
            math.log(kappa) - u - vp + 0.5 * q * (np.log(vp) - math.log(u))
            + log_bessel_iq(q, 2.0 * np.sqrt(u * vp))
        )
        out[pos] = np.exp(logf)
    if abs(q) <= 1e-12:
        # sqrt-parametrized sigma leaves q off zero by rounding
        out[~pos] = kappa * math.exp(-u)
    elif q > 0:
        out[~pos] = 0.0
    else:
        out[~pos] = np.inf
    return float(out) if np.ndim(y) == 0 else out


def cir_mean(t, x, p: JcirParams):
    e = math.exp(-p.a * t)
    return p.theta * (1.0 - e) + x * e


def cir_variance(t, x, p: JcirParams):
    e = math.exp(-p.a * t)
    return x * p.sigma2 / p.a * (e - e * e) + p.theta * p.sigma2 / (2.0 * p.a) * (1.0 - e) ** 2


def cir_sample(t, x, p: JcirParams, rng, size=None):
    """Exact draw(s) of the CIR state at time ``t`` started from ``x``.

    Poisson mixture of gamma laws: ``N ~ Poisson(kappa x e^{-at})`` and then
    ``Gamma(2 a theta / sigma^2 + N, scale 1/kappa)``. Shape zero yields an
    exact zero, so ``theta = 0`` needs no special casing. ``x`` may be an
    array (one draw per entry).
    """
    if not t > 0:
        raise ValidationError(f"t must be > 0, got {t}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValidationError("x must be >= 0")
    kappa = 2.0 * p.a / (p.sigma2 * -math.expm1(-p.a * t))
    lam = kappa * x * math.exp(-p.a * t)
    if size is None:
        size = x.shape
    n = rng.poisson(np.broadcast_to(lam, size))
    return rng.gamma(p.shape + n, 1.0 / kappa)
