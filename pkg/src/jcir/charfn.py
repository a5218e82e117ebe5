"""Closed-form characteristic function of the JCIR process and a Riccati ODE oracle.

For ``Re u <= 0``::

    E[exp(u X_t^x)] = exp(phi(t, u) + x psi(t, u))

    psi(t, u) = u e^{-at} / D(t, u),   D(t, u) = 1 - (sigma^2 / 2a) u (1 - e^{-at})
    phi(t, u) = -(2 a theta / sigma^2) log D(t, u) + int_0^t K(psi(s, u)) ds

with ``K(w) = int (e^{w xi} - 1) nu(dxi)`` the Lévy exponent of the jumps.

Branch note: for ``Re u <= 0`` we have ``Re D >= 1``, so ``D`` stays in the
right half-plane and the principal logarithm and power never meet the cut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec, solve_ivp

from .errors import OdeError, QuadratureError, ValidationError
from .model import JcirParams, first_moment

__all__ = [
    "FrequencyPoint",
    "CfValue",
    "psi",
    "phi",
    "log_term",
    "jump_exponent",
    "jcir_cf",
    "cir_cf",
    "z_cf",
    "riccati_oracle",
    "invariant_cf",
]


@dataclass(frozen=True)
class FrequencyPoint:
    u: complex

    def __post_init__(self):
        if complex(self.u).real > 0:
            raise ValidationError(f"frequency must satisfy Re(u) <= 0, got {self.u}")


@dataclass(frozen=True)
class CfValue:
    value: complex
    phi: complex
    psi: complex


def _as_u(u):
    if isinstance(u, FrequencyPoint):
        u = u.u
    arr = np.asarray(u, dtype=complex)
    if np.any(arr.real > 0):
        raise ValidationError("frequency must satisfy Re(u) <= 0")
    return arr


def _check_t(t):
    if not t >= 0:
        raise ValidationError(f"t must be >= 0, got {t}")


def _denominator(t, u, p):
    return 1.0 - (p.sigma2 / (2.0 * p.a)) * u * -math.expm1(-p.a * t)


def _out(z, u):
    return complex(z) if np.ndim(u) == 0 else z


def psi(t, u, p: JcirParams):
    """``u e^{-at} / (1 - (sigma^2/2a) u (1 - e^{-at}))``."""
    _check_t(t)
    uu = _as_u(u)
    return _out(uu * math.exp(-p.a * t) / _denominator(t, uu, p), uu)


def log_term(t, u, p: JcirParams):
    """Diffusion part of ``phi``: ``-(2 a theta / sigma^2) log D(t, u)``."""
    _check_t(t)
    uu = _as_u(u)
    if p.theta == 0.0:
        return _out(np.zeros_like(uu), uu)
    return _out(-p.shape * np.log(_denominator(t, uu, p)), uu)


def jump_exponent(t, u, p: JcirParams, quad_tol=1e-12):
    """``int_0^t K(psi(s, u)) ds`` by adaptive quadrature in ``s``."""
    _check_t(t)
    uu = _as_u(u)
    if p.nu.is_zero or t == 0.0:
        return _out(np.zeros_like(uu), uu)
    flat = uu.ravel()
    e_scale = p.sigma2 / (2.0 * p.a)

    def integrand(s):
        w = flat * math.exp(-p.a * s) / (1.0 - e_scale * flat * -math.expm1(-p.a * s))
        return p.nu.levy_exponent(w)

    val, err = quad_vec(integrand, 0.0, t, epsabs=quad_tol, epsrel=quad_tol, limit=2000, norm="max")
    if not np.all(np.isfinite(val)) or err > 1e3 * quad_tol * max(1.0, float(np.max(np.abs(val)))):
        raise QuadratureError(f"jump integral over s in [0, {t}] did not converge (err={err:.3g})")
    return _out(val.reshape(uu.shape), uu)


def phi(t, u, p: JcirParams, quad_tol=1e-12):
    """``phi(t, u)``: principal-branch log term plus the jump integral."""
    return log_term(t, u, p) + jump_exponent(t, u, p, quad_tol)


def cir_cf(t, x, u, p: JcirParams):
    """Characteristic function of the CIR part (the jump measure is ignored)."""
    if x < 0:
        raise ValidationError("x must be >= 0")
    return np.exp(log_term(t, u, p) + x * psi(t, u, p))


def z_cf(t, u, p: JcirParams, quad_tol=1e-12):
    """Characteristic function of the pure-jump part ``Z_t`` (``theta = 0``, ``x = 0``)."""
    return np.exp(jump_exponent(t, u, p, quad_tol))


def jcir_cf(t, x, u, p: JcirParams, quad_tol=1e-12) -> CfValue:
    if x < 0:
        raise ValidationError("x must be >= 0")
    ps = psi(t, u, p)
    ph = phi(t, u, p, quad_tol)
    return CfValue(np.exp(ph + x * ps), ph, ps)


def riccati_oracle(t, u, p: JcirParams, ode_tol=1e-10):
    """Integrate ``d/dt phi = F(psi)``, ``d/dt psi = R(psi)`` numerically.

    ``F(w) = a theta w + int (e^{w xi} - 1) nu(dxi)`` is evaluated at every
    stage by quadrature over ``xi`` (exact sum for point masses); no closed
    form of the Lévy exponent is used. Returns ``(phi, psi)`` at ``t``.
    """
    _check_t(t)
    u0 = complex(_as_u(u))
    if u0 == 0 or t == 0.0:
        return 0j, u0
    a, th, s2 = p.a, p.theta, p.sigma2
    nu = p.nu

    def rhs(_s, y):
        w = y[1]
        jump = 0j if nu.is_zero else complex(nu.levy_exponent_quad(np.array([w]))[0])
        return np.array([a * th * w + jump, 0.5 * s2 * w * w - a * w])

    sol = solve_ivp(rhs, (0.0, t), np.array([0j, u0]), method="DOP853", rtol=ode_tol, atol=ode_tol * 1e-2)
    if sol.status != 0:
        raise OdeError(f"Riccati integration failed: {sol.message}")
    return complex(sol.y[0, -1]), complex(sol.y[1, -1])


def invariant_cf(u, p: JcirParams, tail_tol=1e-12, quad_tol=1e-12):
    """Long-time limit of the characteristic function.

    ``(1 - (sigma^2/2a) u)^(-2 a theta/sigma^2) exp(int_0^inf K(psi(s, u)) ds)``;
    the ``s``-integral is cut at ``T`` where ``|u| m1 e^{-aT} / a <= tail_tol``,
    using ``|K(psi)| <= |psi| m1`` and ``|psi(s, u)| <= |u| e^{-as}``.
    """
    uu = _as_u(u)
    m1 = first_moment(p.nu)
    if not math.isfinite(m1):
        raise ValidationError("invariant law needs a finite first jump moment")
    head = np.exp(-p.shape * np.log(1.0 - (p.sigma2 / (2.0 * p.a)) * uu)) if p.theta > 0 else np.ones_like(uu)
    if p.nu.is_zero:
        return _out(head, uu)
    umax = float(np.max(np.abs(uu))) if uu.size else 0.0
    if umax == 0.0:
        return _out(head, uu)
    horizon = max(math.log(umax * m1 / (p.a * tail_tol)) / p.a, 1.0 / p.a)
    return _out(head * np.exp(np.asarray(jump_exponent(horizon, uu, p, quad_tol))), uu)
