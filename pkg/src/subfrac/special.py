"""Modified Bessel functions and the extension profile phi.

``K_nu`` is evaluated from the integral representation

    K_nu(z) = 1/2 int_0^inf xi^(-nu-1) exp(-z (xi + 1/xi) / 2) d xi
            = int_0^inf cosh(nu s) exp(-z cosh s) ds,

with a trapezoid rule in ``s`` whose step is halved until it stops moving
(the integrand is entire and doubly exponentially decaying, so the rule
converges geometrically).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate

SMALL_T = 1e-8
_TRAP_TOL = 1e-14


@dataclass(frozen=True)
class FractionalParams:
    a: float
    alpha: float
    k: float
    theta: float
    c_alpha: float
    C_a: float

    @property
    def nu(self) -> float:
        """Bessel order 1/(2k) = (1 - a)/2."""
        return 1.0 / (2.0 * self.k)

    @property
    def s(self) -> float:
        """Power of L in the lift, (1 - a)/2."""
        return 0.5 * (1.0 - self.a)

    @property
    def C_a_from_profile(self) -> float:
        return 2.0 ** ((self.a - 3) / 2) * self.c_alpha * math.sqrt(self.theta)

    @cached_property
    def phi_prime0(self) -> float:
        return phi_prime_at_zero(self)


def params_from_a(a: float) -> FractionalParams:
    a = float(a)
    if not -1.0 < a < 1.0:
        raise ValueError("a must lie in (-1, 1)")
    alpha = -2.0 * a / (1.0 - a)
    k = (2.0 - alpha) / 2.0
    theta = (1.0 - a) ** (a - 1.0)
    nu = 1.0 / (2.0 * k)
    c_alpha = 2.0 ** (1.0 - nu) / math.gamma(nu) * k ** (-nu)
    C_a = 2.0 ** (a - 1.0) / math.gamma((1.0 - a) / 2.0)
    return FractionalParams(a, alpha, k, theta, c_alpha, C_a)


def params_from_alpha(alpha: float) -> FractionalParams:
    """Inverse of alpha = -2a/(1-a), i.e. a = alpha/(alpha - 2)."""
    if not alpha < 1.0:
        raise ValueError("alpha must be < 1")
    return params_from_a(alpha / (alpha - 2.0))


def _cutoff(nu: float, zmin: float) -> float:
    # smallest S with z (cosh S - 1) - nu S > 40 for the smallest z
    S = 1.0
    for _ in range(60):
        S_new = math.acosh(1.0 + (40.0 + abs(nu) * S) / zmin)
        if abs(S_new - S) < 1e-6:
            break
        S = S_new
    return S_new


def bessel_k_scaled(nu: float, z) -> np.ndarray:
    """exp(z) * K_nu(z) for z > 0 (vectorised)."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError("bessel_k requires z > 0")
    flat = z.ravel()
    if flat.size == 0:
        return z.copy()
    # s = u / sqrt(zs) keeps the Gaussian core near s = 0 resolved for large z
    zs = np.sqrt(np.maximum(flat, 1.0))[:, None]
    S = _cutoff(nu, float(flat.min()))
    umax = float(np.max(np.array([_cutoff(nu, zz) for zz in (flat.min(), flat.max())])
                        * np.sqrt(np.maximum([flat.min(), flat.max()], 1.0))))
    umax = max(umax, S)
    step = 0.5
    prev = None
    while True:
        u = np.arange(0.0, umax + step, step)
        w = np.full(u.size, step)
        w[0] = 0.5 * step
        s = u[None, :] / zs
        vals = np.exp(-2.0 * flat[:, None] * np.sinh(0.5 * s) ** 2) * np.cosh(nu * s) / zs
        cur = vals @ w
        if prev is not None and np.all(np.abs(cur - prev) <= _TRAP_TOL * np.abs(cur)):
            return cur.reshape(z.shape)
        if step < 1e-3:
            raise RuntimeError("Bessel quadrature failed to converge")
        prev = cur
        step *= 0.5


def bessel_k(nu: float, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    return np.exp(-z) * bessel_k_scaled(nu, z)


def _zpow_k(nu: float, z) -> np.ndarray:
    """z^nu K_nu(z), finite as z -> 0 when nu > 0."""
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    # beyond z ~ 745 the value underflows
    live = z < 745.0
    if np.any(live):
        zl = z[live]
        out[live] = np.exp(nu * np.log(zl) - zl) * bessel_k_scaled(nu, zl)
    return out


def _phi_pos(params: FractionalParams, t: np.ndarray) -> np.ndarray:
    z = t ** params.k / params.k
    # t^(1/2) = (k z)^nu
    return params.c_alpha * params.k ** params.nu * _zpow_k(params.nu, z)


def phi(params: FractionalParams, t) -> np.ndarray:
    """phi(t) = c t^(1/2) K_nu(t^k / k), with phi(0) = 1.

    Below t^k = 1e-8 the first-order expansion 1 + phi'(0) t is used.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("phi is defined for t >= 0")
    out = np.ones_like(t)
    small = t ** params.k < SMALL_T
    tiny = small & (t > 0)
    if np.any(tiny):
        out[tiny] = 1.0 + params.phi_prime0 * t[tiny]
    if np.any(~small):
        out[~small] = _phi_pos(params, t[~small])
    return out


def phi_prime(params: FractionalParams, t) -> np.ndarray:
    """phi'(t) from d/dz[z^nu K_nu] = -z^nu K_(nu-1) = -z^nu K_(1-nu)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("phi is defined for t >= 0")
    out = np.empty_like(t)
    zero = t == 0
    if np.any(zero):
        out[zero] = params.phi_prime0
    pos = ~zero
    if np.any(pos):
        tp = t[pos]
        k, nu = params.k, params.nu
        z = tp ** k / k
        zk = np.zeros_like(z)
        live = z < 745.0
        if np.any(live):
            zl = z[live]
            zk[live] = np.exp(nu * np.log(zl) - zl) * bessel_k_scaled(1.0 - nu, zl)
        out[pos] = -params.c_alpha * k ** nu * zk * tp ** (k - 1.0)
    return out


def phi_prime_at_zero(params: FractionalParams) -> float:
    """phi'(0) = -int_0^inf s^(-alpha) phi(s) ds (from -s^alpha phi'' + phi = 0)."""
    f = lambda s: float(_phi_pos(params, np.array([s]))[0]) if s > 0 else 1.0
    head, _ = integrate.quad(f, 0.0, 1.0, weight="alg", wvar=(-params.alpha, 0.0),
                             epsabs=0, epsrel=1e-12, limit=200)
    # tail in u = log s; phi(s) ~ exp(-s^k / k) underflows past s^k / k = 745
    g = lambda u: math.exp(u * (1.0 - params.alpha)) * f(math.exp(u))
    umax = max(math.log(745.0 * params.k) / params.k, 1.0)
    tail, _ = integrate.quad(g, 0.0, umax, epsabs=0, epsrel=1e-12, limit=400)
    return -(head + tail)
