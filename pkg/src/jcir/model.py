"""Model constants and Lévy measures of the jump-diffusion CIR process.

    dX_t = a (theta - X_t) dt + sigma sqrt(X_t) dW_t + dJ_t

where ``J`` is a pure-jump subordinator with Lévy measure ``nu`` on
``(0, inf)``. The measure must satisfy ``int (xi ^ 1) nu(dxi) < inf``.

Four representations of ``nu`` are supported:

* :class:`ZeroMeasure` -- no jumps (classical CIR).
* :class:`PointMasses` -- finitely many atoms; every integral is an exact sum.
* :class:`FiniteActivity` -- compound Poisson, total rate ``c`` times a
  normalized jump law (exponential or gamma from the catalog).
* :class:`InfiniteActivity` -- a Lévy density with infinite total mass and a
  small-jump truncation threshold used whenever jumps must be sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import integrate, special, stats

from .errors import QuadratureError, ValidationError

__all__ = [
    "JcirParams",
    "LevyMeasure",
    "ZeroMeasure",
    "PointMasses",
    "FiniteActivity",
    "InfiniteActivity",
    "ExponentialJumps",
    "GammaJumps",
    "TemperedStableDensity",
    "AdmissibilityReport",
    "check_admissible",
    "first_moment",
    "second_moment",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


# ---------------------------------------------------------------------------
# improper integrals with divergence detection


def _improper_upper(f, start, bulk, quad_tol, ceiling, name, max_doublings=1100):
    """Integrate ``f`` over ``[start, inf)`` by successive cutoff doublings.

    Returns ``math.inf`` when the partial integral passes ``ceiling`` or when
    five consecutive doublings each add more than ``quad_tol`` (relative) with
    non-shrinking increments.
    """
    hi = max(2.0 * start, bulk)
    total = _quad(f, start, hi, quad_tol, name)
    return _accumulate(f, total, hi, 2.0, quad_tol, ceiling, name, max_doublings)


def _improper_lower(f, end, quad_tol, ceiling, name, max_halvings=1000):
    """Integrate ``f`` over ``(0, end]`` by successive cutoff halvings."""
    lo = 0.5 * end
    total = _quad(f, lo, end, quad_tol, name)
    return _accumulate(f, total, lo, 0.5, quad_tol, ceiling, name, max_halvings)


def _accumulate(f, total, edge, factor, quad_tol, ceiling, name, max_steps):
    prev = None
    streak = 0
    for step in range(max_steps):
        nxt = edge * factor
        a, b = (edge, nxt) if factor > 1 else (nxt, edge)
        inc = _quad(f, a, b, quad_tol, name)
        total += inc
        if not math.isfinite(total) or abs(total) > ceiling:
            return math.inf
        growth = abs(inc) / abs(total) if total != 0.0 else (0.0 if inc == 0.0 else math.inf)
        if step >= 3 and growth <= quad_tol:
            if prev and 0.0 < inc / prev < 1.0:
                r = inc / prev
                total += inc * r / (1.0 - r)
            return total
        if prev is not None and growth > quad_tol and abs(inc) >= 0.999 * abs(prev):
            streak += 1
        else:
            streak = 0
        if streak >= 5:
            return math.inf
        prev = inc
        edge = nxt
        if edge == 0.0 or not math.isfinite(edge):
            break
    raise QuadratureError(f"integral {name!r} did not converge after {max_steps} cutoff steps")


def _quad(f, a, b, quad_tol, name):
    val, err = integrate.quad(f, a, b, epsabs=0.0, epsrel=max(quad_tol * 1e-2, 1e-13), limit=400)
    if not math.isfinite(val) or (err > max(1e-6 * abs(val), 1e-300) and err > 1e3 * quad_tol * abs(val)):
        raise QuadratureError(f"integral {name!r}: quadrature on [{a:g}, {b:g}] failed (err={err:.3g})")
    return val


def _quad_log(f, a, b, quad_tol, name):
    """``int_a^b f`` computed as ``int f(e^s) e^s ds`` for ranges spanning decades."""
    return _quad(lambda s: f(math.exp(s)) * math.exp(s), math.log(a), math.log(b), quad_tol, name)


def _panel_rule(edges):
    """Composite Gauss-Legendre nodes and weights over consecutive ``edges``."""
    left = edges[:-1, None]
    half = 0.5 * np.diff(edges)[:, None]
    nodes = left + half * (_GL_NODES[None, :] + 1.0)
    weights = half * _GL_WEIGHTS[None, :]
    return nodes.ravel(), weights.ravel()


def _exponent_by_panels(w, density, lower, upper):
    """Composite-rule value of ``int_lower^upper (e^{w xi} - 1) n(xi) dxi`` for each ``w``.

    Panels are geometric near ``lower`` and uniform further out with a width
    that resolves the oscillation ``e^{i Im(w) xi}``.
    """
    w = np.asarray(w, dtype=complex)
    flat = w.ravel()
    # only the oscillation needs narrow panels; decay in Re(w) is handled by the geometric panels
    wmax = float(np.max(np.abs(flat.imag))) if flat.size else 0.0
    width = min(upper / 8.0, 10.0 / (1.0 + wmax), 1.0)
    geo = np.geomspace(lower, width, max(int(math.log2(width / lower)) + 1, 2))
    uni = np.arange(width, upper, width)
    edges = np.unique(np.concatenate([geo, uni, [upper]]))
    nodes, weights = _panel_rule(edges)
    dens = weights * density(nodes)
    out = np.empty(flat.shape, dtype=complex)
    # chunk to bound memory for long u grids
    for i in range(0, flat.size, 64):
        blk = flat[i : i + 64, None]
        out[i : i + 64] = (np.expm1(blk * nodes[None, :]) * dens[None, :]).sum(axis=1)
    return out.reshape(w.shape)


# ---------------------------------------------------------------------------
# jump laws (normalized) and Lévy densities


@dataclass(frozen=True)
class ExponentialJumps:
    """Exponential jump sizes with the given mean."""

    mean: float

    def __post_init__(self):
        if not self.mean > 0:
            raise ValidationError(f"exponential jump mean must be > 0, got {self.mean}")

    def pdf(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.where(xi > 0, np.exp(-xi / self.mean) / self.mean, 0.0)

    def mgf(self, w):
        return 1.0 / (1.0 - self.mean * np.asarray(w, dtype=complex))

    def moment(self, k):
        return math.factorial(k) * self.mean**k

    def bulk(self):
        return 8.0 * self.mean

    def cutoff(self):
        return 45.0 * self.mean

    def sample(self, rng, size):
        return rng.exponential(self.mean, size)


@dataclass(frozen=True)
class GammaJumps:
    """Gamma(shape, scale) jump sizes."""

    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ValidationError("gamma jump law needs shape > 0 and scale > 0")

    def pdf(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.where(xi > 0, stats.gamma.pdf(xi, self.shape, scale=self.scale), 0.0)

    def mgf(self, w):
        return (1.0 - self.scale * np.asarray(w, dtype=complex)) ** (-self.shape)

    def moment(self, k):
        return float(np.prod(self.shape + np.arange(k))) * self.scale**k

    def bulk(self):
        return float(stats.gamma.isf(1e-3, self.shape, scale=self.scale))

    def cutoff(self):
        return float(stats.gamma.isf(1e-19, self.shape, scale=self.scale))

    def sample(self, rng, size):
        return rng.gamma(self.shape, self.scale, size)


@dataclass(frozen=True)
class TemperedStableDensity:
    """Lévy density ``c xi^(-1-alpha) exp(-lam xi)`` with ``0 <= alpha < 1``.

    ``alpha = 0`` is the gamma process; ``alpha = 1/2`` gives the inverse
    Gaussian subordinator.
    """

    c: float
    alpha: float
    lam: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValidationError("tempered-stable c must be > 0")
        if not 0.0 <= self.alpha < 1.0:
            raise ValidationError("tempered-stable alpha must lie in [0, 1)")
        if not self.lam > 0:
            raise ValidationError("tempered-stable lam must be > 0")

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = self.c * xi ** (-1.0 - self.alpha) * np.exp(-self.lam * xi)
        return np.where(xi > 0, out, 0.0)

    def levy_exponent(self, w):
        w = np.asarray(w, dtype=complex)
        if self.alpha == 0.0:
            return -self.c * (np.log(self.lam - w) - math.log(self.lam))
        g = special.gamma(-self.alpha)
        return self.c * g * ((self.lam - w) ** self.alpha - self.lam**self.alpha)

    def bulk(self):
        return 8.0 / self.lam

    def cutoff(self):
        return 45.0 / self.lam

    def sample_above(self, rng, eps, size):
        """Exact draws from the density restricted to ``[eps, inf)``.

        Two-piece rejection: a power-law proposal on ``[eps, 1]`` accepted
        with ``exp(-lam (xi - eps))``, an exponential proposal on ``(1, inf)``
        accepted with ``xi^(-1-alpha)``.
        """
        hi = max(1.0, eps)
        m_lo = _quad_log(self, eps, hi, 1e-10, "lower piece") if hi > eps else 0.0
        m_hi = _quad(self, hi, self.cutoff(), 1e-10, "upper piece")
        p_lo = m_lo / (m_lo + m_hi)
        out = np.empty(size)
        n_lo = rng.binomial(size, p_lo)
        out[:n_lo] = self._sample_power(rng, eps, hi, n_lo)
        out[n_lo:] = self._sample_exp_tail(rng, hi, size - n_lo)
        rng.shuffle(out)
        return out

    def _sample_power(self, rng, lo, hi, n):
        got = []
        remaining = n
        while remaining > 0:
            m = max(2 * remaining, 64)
            uu = rng.random(m)
            if self.alpha == 0.0:
                prop = lo * (hi / lo) ** uu
            else:
                a = self.alpha
                # inverse CDF of xi^(-1-a) on [lo, hi]
                prop = (lo**-a - uu * (lo**-a - hi**-a)) ** (-1.0 / a)
            keep = prop[rng.random(m) < np.exp(-self.lam * (prop - lo))]
            got.append(keep[:remaining])
            remaining -= got[-1].size
        return np.concatenate(got) if got else np.empty(0)

    def _sample_exp_tail(self, rng, lo, n):
        got = []
        remaining = n
        while remaining > 0:
            m = max(2 * remaining, 64)
            prop = lo + rng.exponential(1.0 / self.lam, m)
            keep = prop[rng.random(m) < (prop / lo) ** (-1.0 - self.alpha)]
            got.append(keep[:remaining])
            remaining -= got[-1].size
        return np.concatenate(got) if got else np.empty(0)


@dataclass(frozen=True)
class _RestrictedLaw:
    """Normalized restriction of a Lévy density to ``[eps, inf)``."""

    density: Callable
    eps: float
    mass: float
    upper: float

    def pdf(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.where(xi >= self.eps, self.density(np.maximum(xi, self.eps)), 0.0) / self.mass

    def mgf(self, w):
        return None

    def moment(self, k):
        val = integrate.quad(lambda x: x**k * self.density(x), self.eps, np.inf, limit=400)[0]
        return val / self.mass

    def bulk(self):
        return max(2.0 * self.eps, min(self.upper / 5.0, 1.0))

    def cutoff(self):
        return self.upper

    def sample(self, rng, size):
        sampler = getattr(self.density, "sample_above", None)
        if sampler is not None:
            return sampler(rng, self.eps, size)
        return self._table.sample(rng, size)

    @cached_property
    def _table(self):
        return _InverseCdfTable.build(self.density, self.eps, self.upper)


@dataclass(frozen=True)
class _InverseCdfTable:
    log_x: np.ndarray
    cdf: np.ndarray

    @classmethod
    def build(cls, density, lo, hi, n=8001):
        x = np.geomspace(lo, hi, n)
        # integrate in log xi: dF = xi n(xi) dlog(xi)
        g = x * density(x)
        lx = np.log(x)
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * np.diff(lx))])
        return cls(lx, cdf / cdf[-1])

    def sample(self, rng, size):
        return np.exp(np.interp(rng.random(size), self.cdf, self.log_x))


# ---------------------------------------------------------------------------
# Lévy measures


class LevyMeasure:
    """Base class of the Lévy-measure representations.

    Subclasses provide ``levy_exponent`` (closed form where one exists),
    ``levy_exponent_quad`` (always by quadrature / exact sums), the total mass,
    and a finite-mass sampling representation.
    """

    is_zero = False

    def levy_exponent(self, w):
        """``int (e^{w xi} - 1) nu(dxi)`` for ``Re w <= 0``."""
        return self.levy_exponent_quad(w)

    def levy_exponent_quad(self, w):
        raise NotImplementedError

    @property
    def total_mass(self) -> float:
        raise NotImplementedError

    def sampling_measure(self) -> "LevyMeasure":
        """Finite-mass measure used by samplers (identity unless truncated)."""
        return self

    def sample_jumps(self, rng, size):
        """Jump sizes drawn from ``nu / |nu|`` of the sampling measure."""
        raise NotImplementedError

    def truncation_bias(self, t: float, quad_tol: float = 1e-10) -> float:
        """Bound on the mean bias ``t * int_0^eps xi nu(dxi)`` from truncation."""
        return 0.0


@dataclass(frozen=True)
class ZeroMeasure(LevyMeasure):
    is_zero = True

    def levy_exponent(self, w):
        return np.zeros(np.shape(w), dtype=complex)

    def levy_exponent_quad(self, w):
        return np.zeros(np.shape(w), dtype=complex)

    @property
    def total_mass(self):
        return 0.0

    def sample_jumps(self, rng, size):
        return np.zeros(size)


@dataclass(frozen=True)
class PointMasses(LevyMeasure):
    """``nu = sum_i w_i delta_{xi_i}``."""

    sizes: tuple
    weights: tuple

    def __init__(self, atoms=None, *, sizes=None, weights=None):
        if atoms is not None:
            atoms = list(atoms)
            sizes = tuple(float(s) for s, _ in atoms)
            weights = tuple(float(m) for _, m in atoms)
        if sizes is None or weights is None:
            raise ValidationError("point masses need sizes and weights")
        sizes, weights = tuple(map(float, sizes)), tuple(map(float, weights))
        if len(sizes) != len(weights) or not sizes:
            raise ValidationError("point masses: sizes and weights must be non-empty and equally long")
        if any(not (s > 0 and math.isfinite(s)) for s in sizes):
            raise ValidationError("point masses: every jump size must be > 0")
        if any(not (m > 0 and math.isfinite(m)) for m in weights):
            raise ValidationError("point masses: every mass must be > 0")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "weights", weights)

    @property
    def xi(self):
        return np.array(self.sizes)

    @property
    def w(self):
        return np.array(self.weights)

    def sum(self, h, mask=None):
        xi, w = self.xi, self.w
        if mask is not None:
            sel = mask(xi)
            xi, w = xi[sel], w[sel]
        return float(np.sum(w * h(xi))) if xi.size else 0.0

    def levy_exponent(self, w):
        return self.levy_exponent_quad(w)

    def levy_exponent_quad(self, w):
        w = np.asarray(w, dtype=complex)
        return np.tensordot(np.expm1(w[..., None] * self.xi), self.w, axes=([-1], [0]))

    @property
    def total_mass(self):
        return float(sum(self.weights))

    def sample_jumps(self, rng, size):
        return rng.choice(self.xi, size=size, p=self.w / self.w.sum())


@dataclass(frozen=True)
class FiniteActivity(LevyMeasure):
    """Compound Poisson measure ``nu = rate * law``."""

    rate: float
    law: object

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValidationError(f"finite_activity rate must be > 0, got {self.rate}")

    def density(self, xi):
        return self.rate * self.law.pdf(xi)

    def levy_exponent(self, w):
        mgf = self.law.mgf(w)
        if mgf is None:
            return self.levy_exponent_quad(w)
        return self.rate * (mgf - 1.0)

    def levy_exponent_quad(self, w):
        upper = self.law.cutoff()
        lower = getattr(self.law, "eps", 0.0) or upper * 1e-16
        return _exponent_by_panels(w, self.density, lower, upper)

    @property
    def total_mass(self):
        return float(self.rate)

    def sample_jumps(self, rng, size):
        return self.law.sample(rng, size)


@dataclass(frozen=True)
class InfiniteActivity(LevyMeasure):
    """Lévy density ``n`` with infinite total mass.

    ``eps_trunc`` is the threshold below which jumps are dropped when
    sampling. ``int (xi ^ 1) n(xi) dxi`` is checked at construction.
    """

    density: Callable
    eps_trunc: float = 1e-8
    upper: float | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.eps_trunc > 0:
            raise ValidationError("eps_trunc must be > 0")
        if self.upper is None:
            cut = getattr(self.density, "cutoff", None)
            object.__setattr__(self, "upper", float(cut()) if cut else 1e3)
        bulk = getattr(self.density, "bulk", lambda: 2.0)()
        val = _improper_lower(lambda x: x * self.density(x), 1.0, 1e-10, 1e15, "int_0^1 xi nu(dxi)")
        val += _improper_upper(self.density, 1.0, bulk, 1e-10, 1e15, "int_1^inf nu(dxi)")
        if not math.isfinite(val):
            raise ValidationError("infinite_activity density violates int (xi ^ 1) nu(dxi) < inf")

    def levy_exponent(self, w):
        closed = getattr(self.density, "levy_exponent", None)
        if closed is not None:
            return closed(w)
        return self.levy_exponent_quad(w)

    def levy_exponent_quad(self, w):
        w = np.asarray(w, dtype=complex)
        lower = self.upper * 1e-16
        body = _exponent_by_panels(w, self.density, lower, self.upper)
        # linear term on (0, lower): e^{w xi} - 1 ~ w xi there
        return body + w * self._small_moment(lower)

    @cached_property
    def _small_moment_cache(self):
        return {}

    def _small_moment(self, eps):
        cache = self._small_moment_cache
        if eps not in cache:
            cache[eps] = _improper_lower(lambda x: x * self.density(x), eps, 1e-10, 1e15, "int_0^eps xi nu")
        return cache[eps]

    @property
    def total_mass(self):
        return math.inf

    @cached_property
    def _truncated(self):
        mass = _quad_log(self.density, self.eps_trunc, 1.0, 1e-10, "truncated mass") if self.eps_trunc < 1 else 0.0
        lo = max(self.eps_trunc, 1.0)
        mass += _quad_log(self.density, lo, self.upper, 1e-10, "truncated mass")
        return FiniteActivity(mass, _RestrictedLaw(self.density, self.eps_trunc, mass, self.upper))

    def sampling_measure(self):
        return self._truncated

    def sample_jumps(self, rng, size):
        return self._truncated.sample_jumps(rng, size)

    def truncation_bias(self, t, quad_tol=1e-10):
        return t * self._small_moment(self.eps_trunc)


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class JcirParams:
    """Constants of the JCIR model.

    a : mean-reversion speed (> 0)
    theta : long-run level (>= 0)
    sigma : diffusion coefficient (> 0)
    nu : Lévy measure of the jump driver
    """

    a: float
    theta: float
    sigma: float
    nu: LevyMeasure = field(default_factory=ZeroMeasure)

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ValidationError(f"a must satisfy a > 0, got a = {self.a}")
        if not (self.theta >= 0 and math.isfinite(self.theta)):
            raise ValidationError(f"theta must satisfy theta >= 0, got theta = {self.theta}")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValidationError(f"sigma must satisfy sigma > 0, got sigma = {self.sigma}")
        if not isinstance(self.nu, LevyMeasure):
            raise ValidationError("nu must be a LevyMeasure")

    @property
    def sigma2(self):
        return self.sigma * self.sigma

    @property
    def shape(self):
        """``2 a theta / sigma^2``; the CIR Bessel order is ``shape - 1``."""
        return 2.0 * self.a * self.theta / self.sigma2

    def with_nu(self, nu):
        return JcirParams(self.a, self.theta, self.sigma, nu)


# ---------------------------------------------------------------------------
# admissibility


@dataclass(frozen=True)
class AdmissibilityReport:
    int_xi_wedge_1: float
    int_tail_xi: float
    int_xi_log: float
    int_xi: float

    @property
    def lemma32_ok(self) -> bool:
        """Small-jump condition ``int_0^1 xi ln(1/xi) nu(dxi) < inf``."""
        return math.isfinite(self.int_xi_log)

    @property
    def lemma41_ok(self) -> bool:
        """Large-jump moment condition ``int_1^inf xi nu(dxi) < inf``."""
        return math.isfinite(self.int_tail_xi)

    @property
    def theorem_ok(self) -> bool:
        return self.lemma32_ok and self.lemma41_ok


def _density_of(nu):
    return nu.density


def check_admissible(nu: LevyMeasure, quad_tol: float = 1e-10, ceiling: float = 1e15) -> AdmissibilityReport:
    """Evaluate the integrability conditions on ``nu``.

    Exact sums for point masses, cutoff-doubling quadrature otherwise. An
    infinite integral is reported as ``math.inf``.
    """
    if nu.is_zero:
        return AdmissibilityReport(0.0, 0.0, 0.0, 0.0)
    if isinstance(nu, PointMasses):
        wedge = nu.sum(lambda x: np.minimum(x, 1.0))
        tail = nu.sum(lambda x: x, lambda x: x > 1.0)
        xlog = nu.sum(lambda x: -x * np.log(x), lambda x: x < 1.0)
        return AdmissibilityReport(wedge, tail, xlog, nu.sum(lambda x: x))
    n = _density_of(nu)
    bulk = _bulk_of(nu)
    low = _improper_lower(lambda x: x * n(x), 1.0, quad_tol, ceiling, "int_0^1 xi nu(dxi)")
    mass_hi = _improper_upper(n, 1.0, bulk, quad_tol, ceiling, "int_1^inf nu(dxi)")
    tail = _improper_upper(lambda x: x * n(x), 1.0, bulk, quad_tol, ceiling, "int_1^inf xi nu(dxi)")
    xlog = _improper_lower(lambda x: -x * math.log(x) * n(x), 1.0, quad_tol, ceiling, "int_0^1 xi ln(1/xi) nu(dxi)")
    return AdmissibilityReport(low + mass_hi, tail, xlog, low + tail)


def _bulk_of(nu):
    src = nu.law if isinstance(nu, FiniteActivity) else nu.density
    return getattr(src, "bulk", lambda: 2.0)()


def first_moment(nu: LevyMeasure, quad_tol: float = 1e-10, ceiling: float = 1e15) -> float:
    """``int xi nu(dxi)``; ``math.inf`` when the moment diverges."""
    if nu.is_zero:
        return 0.0
    if isinstance(nu, PointMasses):
        return nu.sum(lambda x: x)
    n = _density_of(nu)
    low = _improper_lower(lambda x: x * n(x), 1.0, quad_tol, ceiling, "int_0^1 xi nu(dxi)")
    tail = _improper_upper(lambda x: x * n(x), 1.0, _bulk_of(nu), quad_tol, ceiling, "int_1^inf xi nu(dxi)")
    return low + tail


def second_moment(nu: LevyMeasure, quad_tol: float = 1e-10, ceiling: float = 1e15) -> float:
    """``int xi^2 nu(dxi)``; used for cumulant-based spans."""
    if nu.is_zero:
        return 0.0
    if isinstance(nu, PointMasses):
        return nu.sum(lambda x: x * x)
    n = _density_of(nu)
    low = _improper_lower(lambda x: x * x * n(x), 1.0, quad_tol, ceiling, "int_0^1 xi^2 nu(dxi)")
    tail = _improper_upper(lambda x: x * x * n(x), 1.0, _bulk_of(nu), quad_tol, ceiling, "int_1^inf xi^2 nu(dxi)")
    return low + tail
