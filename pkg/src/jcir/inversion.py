"""Transition densities by cosine-series inversion of the characteristic function.

The law of ``X_t^x`` is the convolution of the CIR law (density ``f``) with the
law of ``Z_t``, which has an atom ``C(t) = e^{-lambda(t)}`` at zero. Writing

    p = C(t) f + r,    r_hat(u) = cir_cf(u) (z_cf(u) - C(t))

the atom contributes ``C(t) f`` in closed form and only the smooth remainder
``r`` goes through the cosine expansion on ``[0, y_max]``. With ``nu = 0`` the
remainder vanishes identically and ``p = f``. ``split_atom=False`` inverts the
full characteristic function instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .charfn import cir_cf, z_cf
from .cir import cir_density, cir_mean, cir_variance
from .errors import InversionError, ValidationError
from .jumppart import c_lower, z_mean
from .model import JcirParams, check_admissible, first_moment, second_moment


@dataclass(frozen=True)
class InversionConfig:
    """Cosine-expansion settings.

    span_l : ``y_max = mean + span_l * std``
    n_terms : number of cosine terms
    tol_mass : allowed deviation of the recovered mass from one
    split_atom : invert only the part of the law with at least one jump
    y_max : explicit right end, overriding the cumulant rule
    """

    span_l: float = 12.0
    n_terms: int = 1 << 12
    tol_mass: float = 1e-6
    split_atom: bool = True
    y_max: float | None = None

    def __post_init__(self):
        if not self.span_l > 0:
            raise ValidationError("span_l must be > 0")
        if self.n_terms < 16:
            raise ValidationError("n_terms must be >= 16")
        if not self.tol_mass > 0:
            raise ValidationError("tol_mass must be > 0")
        if self.y_max is not None and not self.y_max > 0:
            raise ValidationError("y_max must be > 0")


@dataclass(frozen=True)
class DensityGrid:
    """``p(t, x, .)`` on ``y_grid``.

    ``mass`` and ``mean`` are integrals of the recovered law over
    ``[0, y_max]``; ``inv_error_bound`` estimates the sup-norm contribution of
    the discarded cosine terms.
    """

    t: float
    x: float
    y_grid: np.ndarray
    p_values: np.ndarray
    inv_error_bound: float
    mass: float
    mean: float
    y_max: float
    c_t: float


@dataclass(frozen=True)
class LowerBoundReport:
    t: float
    x: float
    y_grid: np.ndarray
    margin: np.ndarray
    min_margin: float
    violations: int
    c_t: float
    p_values: np.ndarray
    f_values: np.ndarray


def z_variance(t, p: JcirParams):
    """``Var Z_t = int_0^t int [xi^2 e^{-2as} + xi (sigma^2/a)(e^{-as} - e^{-2as})] nu(dxi) ds``."""
    if p.nu.is_zero:
        return 0.0
    m1, m2 = first_moment(p.nu), second_moment(p.nu)
    a = p.a
    i1 = -math.expm1(-a * t) / a
    i2 = -math.expm1(-2.0 * a * t) / (2.0 * a)
    return m2 * i2 + m1 * p.sigma2 / a * (i1 - i2)


def span(t, x, p: JcirParams, cfg: InversionConfig = InversionConfig()) -> float:
    """Right end ``y_max`` of the inversion interval.

    ``mean + span_l * std``, widened when needed so that the CIR law leaves
    less than ``tol_mass / 100`` beyond ``y_max`` after a further
    ``span_l * std(Z_t)``; twelve deviations alone leave ``e^{-13}`` of an
    exponential-shaped law outside.
    """
    if cfg.y_max is not None:
        return float(cfg.y_max)
    m = cir_mean(t, x, p) + z_mean(t, p)
    vz = z_variance(t, p)
    v = cir_variance(t, x, p) + vz
    if not (math.isfinite(m) and math.isfinite(v)):
        raise InversionError("cumulant span needs finite jump moments; set y_max explicitly")
    return max(m + cfg.span_l * math.sqrt(v), _cir_isf(t, x, 1e-2 * cfg.tol_mass, p) + cfg.span_l * math.sqrt(vz))


def _chi2_law(t, x, p):
    # 2 kappa Y is noncentral chi-square with 2 * shape degrees of freedom
    kappa = 2.0 * p.a / (p.sigma2 * -math.expm1(-p.a * t))
    nc = 2.0 * kappa * x * math.exp(-p.a * t)
    df = 2.0 * p.shape
    law = stats.chi2(df) if nc == 0.0 else stats.ncx2(df, nc)
    return law, 2.0 * kappa


def _cir_isf(t, x, q, p):
    law, scale = _chi2_law(t, x, p)
    return float(law.isf(q)) / scale


def _cir_cdf(t, x, y, p):
    law, scale = _chi2_law(t, x, p)
    return float(law.cdf(scale * y))


def _remainder_cf(t, x, u, p, c_t, split):
    base = cir_cf(t, x, u, p)
    if p.nu.is_zero:
        return np.zeros_like(base) if split else base
    zc = z_cf(t, u, p)
    return base * (zc - c_t) if split else base * zc


def _coefficients(t, x, p, b, k, c_t, split):
    w = k * math.pi / b
    coef = (2.0 / b) * np.real(_remainder_cf(t, x, 1j * w, p, c_t, split))
    coef[k == 0] *= 0.5
    return coef, w


def density_from_cf(t, x, y_grid, p: JcirParams, inv_cfg: InversionConfig = InversionConfig()) -> DensityGrid:
    """Recover ``p(t, x, y)`` on ``y_grid`` from the characteristic function."""
    if not t > 0:
        raise ValidationError(f"t must be > 0, got {t}")
    if x < 0:
        raise ValidationError("x must be >= 0")
    if not p.theta > 0:
        raise ValidationError("theta must be > 0: the CIR part has an atom at 0 when theta = 0")
    y = np.asarray(y_grid, dtype=float)
    if y.ndim != 1 or np.any(y < 0) or np.any(np.diff(y) <= 0):
        raise ValidationError("y_grid must be increasing and non-negative")
    b = span(t, x, p, inv_cfg)
    n = inv_cfg.n_terms
    split = inv_cfg.split_atom
    c_t = 1.0 if p.nu.is_zero else c_lower(t, p)

    k = np.arange(n)
    coef, w = _coefficients(t, x, p, b, k, c_t, split)
    inside = y <= b
    series = np.zeros_like(y)
    for lo in range(0, y.size, 256):
        yy = y[lo : lo + 256]
        series[lo : lo + 256] = np.cos(np.outer(yy, w)) @ coef
    series[~inside] = 0.0
    if split:
        vals = c_t * cir_density(t, x, y, p) + series
    else:
        vals = series

    # mass and mean from exact integrals of the cosine terms over [0, b];
    # wrapped-around tail mass shows up in inv_error_bound instead
    sgn = np.where(k % 2 == 0, 1.0, -1.0)
    mass = float(coef[0] * b)
    mean = float(coef[0] * b * b / 2.0 + np.sum(coef[1:] * (sgn[1:] - 1.0) / w[1:] ** 2))
    if split:
        mass += c_t * _cir_cdf(t, x, b, p)
        mean += c_t * cir_mean(t, x, p)
    if abs(mass - 1.0) > inv_cfg.tol_mass:
        raise InversionError(
            f"recovered mass {mass:.10g} deviates from 1 by more than {inv_cfg.tol_mass:g};"
            " increase span_l or n_terms"
        )

    # tail estimate: sum of |coefficients| for k in [n, 2n), sampled on a stride
    k_tail = np.arange(n, 2 * n, 16)
    tail_coef, _ = _coefficients(t, x, p, b, k_tail, c_t, split)
    inv_err = float(np.mean(np.abs(tail_coef)) * n)
    return DensityGrid(float(t), float(x), y, vals, inv_err, float(mass), float(mean), float(b), float(c_t))


def default_grid(t, x, p: JcirParams, n_points=400, inv_cfg: InversionConfig = InversionConfig()):
    """``n_points`` abscissae on ``[y_max 1e-4, y_max]``."""
    b = span(t, x, p, inv_cfg)
    return np.linspace(b * 1e-4, b, n_points)


def lower_bound_check(t, x, y_grid, p: JcirParams, tol=1e-6, inv_cfg: InversionConfig = InversionConfig()) -> LowerBoundReport:
    """Margins ``p(t, x, y) - C(t) f(t, x, y)`` on ``y_grid``.

    ``y_grid=None`` uses :func:`default_grid`.
    """
    if not p.nu.is_zero and not check_admissible(p.nu).lemma32_ok:
        raise ValidationError("lower bound needs int_0^1 xi ln(1/xi) nu(dxi) < inf")
    if y_grid is None:
        y_grid = default_grid(t, x, p, inv_cfg=inv_cfg)
    dg = density_from_cf(t, x, y_grid, p, inv_cfg)
    f = cir_density(t, x, dg.y_grid, p)
    margin = dg.p_values - dg.c_t * f
    viol = int(np.count_nonzero(margin < -tol))
    return LowerBoundReport(dg.t, dg.x, dg.y_grid, margin, float(np.min(margin)), viol, dg.c_t, dg.p_values, f)
