"""Riesz-type kernels, the kernel-derived norm and the Poisson kernel.

All kernels are time integrals of the heat kernel,

    R_beta(x)    = 1/Gamma(beta/2) int_0^inf t^(beta/2 - 1) h(t, x) dt,
    Rt_alpha(x)  = (alpha/2)/|Gamma(-alpha/2)| int_0^inf t^(-alpha/2 - 1) h(t, x) dt,
    P(x, y)      = C_a y^(1-a) int_0^inf t^((a-3)/2) exp(-y^2/4t) h(t, x) dt.

Because h(t, x) = t^(-Q/2) h(1, delta_(1/sqrt t) x), the substitution
t = rho(x)^2 e^s turns the first two into rho^(beta-Q) times an integral that
only depends on the direction of x.  On the Heisenberg group the direction is
the angle psi in r^2 = cos(psi), z = sin(psi) on the unit gauge sphere, where
the volume element is rho^3 d rho d psi d theta.

Note on normalisation.  With the prefactor above, Rt_alpha is positive and
L R_(2-alpha) = -(2/alpha) Rt_alpha away from the origin; the kernel of the
singular-integral form of L^(alpha/2) is K_alpha = (2/alpha) Rt_alpha.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.interpolate import CubicSpline, RectBivariateSpline
from scipy.special import gamma as _gamma

from .conv import (cell_weights, exterior_box_integral, group_convolve, kernel_extent,
                   origin_box_integral, scaled_kernel_cells)
from .group import GridFunction, GroupSpec, dilate, gauge, heisenberg1
from .heat import HeatProvider, _heis_base, h1_table, h1_unit, heat_eval
from .quad import composite_gauss
from .special import params_from_a

# ---------------------------------------------------------------------------
# quadrature in log time


@dataclass(frozen=True)
class QuadratureScheme:
    """Log-time quadrature for t = rho^2 e^s, s in [log t_min, log t_max].

    ``split_at_rho2`` uses separate composite Gauss panels on each side of
    t = rho^2 (s = 0); ``log_t`` uses one uniform panel set.
    """

    substitution: str = "split_at_rho2"
    nodes: int = 512
    t_min: float = math.exp(-8.0)
    t_max: float = math.exp(16.0)

    def __post_init__(self):
        if self.substitution not in ("log_t", "split_at_rho2"):
            raise ValueError("substitution must be 'log_t' or 'split_at_rho2'")
        if self.nodes < 64:
            raise ValueError("nodes must be at least 64")
        if not self.t_min < self.t_max:
            raise ValueError("t_min must be below t_max")

    def rule(self):
        a, b = math.log(self.t_min), math.log(self.t_max)
        if self.substitution == "log_t":
            return composite_gauss(max(self.nodes // 16, 1), a, b)
        if not a < 0 < b:
            raise ValueError("split_at_rho2 needs t_min < 1 < t_max")
        n1 = max(int(round(self.nodes * (-a) / (b - a) / 16)), 1)
        n2 = max(self.nodes // 16 - n1, 1)
        x1, w1 = composite_gauss(n1, a, 0.0)
        x2, w2 = composite_gauss(n2, 0.0, b)
        return np.concatenate([x1, x2]), np.concatenate([w1, w2])


DEFAULT_SCHEME = QuadratureScheme()


def unit_heat(g: GroupSpec, q, tabulated: bool = False) -> np.ndarray:
    """h(1, q) for any supported group."""
    return heat_eval(HeatProvider(g, tabulated=tabulated), 1.0, q)


def heat_at_origin(g: GroupSpec) -> float:
    return float(unit_heat(g, np.zeros(g.dim)))


def homogeneous_time_integral(g: GroupSpec, mu: float, p, scheme: QuadratureScheme = DEFAULT_SCHEME,
                              tabulated: bool = False) -> np.ndarray:
    """J_mu(p) = int_0^inf t^(mu-1) h(t, p) dt for p != e and mu < Q/2.

    The part beyond t_max uses h(t, p) ~ t^(-Q/2) h(1, e).
    """
    p = np.asarray(p, float)
    Q = g.Q
    if not mu < Q / 2:
        raise ValueError("time integral diverges at infinity")
    rho = gauge(g, p)
    if np.any(rho == 0):
        raise ValueError("kernel is singular at the identity")
    ph = dilate(g, 1.0, p) * (1.0 / rho[..., None]) ** g.d
    s, w = scheme.rule()
    flat = ph.reshape(-1, g.dim)
    out = np.empty(flat.shape[0])
    expo = mu - Q / 2
    for c in range(0, flat.shape[0], 2048):
        blk = flat[c:c + 2048]
        pts = blk[:, None, :] * np.exp(-0.5 * s)[None, :, None] ** g.d
        hv = unit_heat(g, pts, tabulated)
        out[c:c + 2048] = hv @ (w * np.exp(expo * s))
    smax = math.log(scheme.t_max)
    out += heat_at_origin(g) * math.exp(expo * smax) / (-expo)
    return (rho ** (2 * mu - Q)) * out.reshape(rho.shape)


# ---------------------------------------------------------------------------
# direction profiles


def _psi(p):
    r2 = p[..., 0] ** 2 + p[..., 1] ** 2
    return np.arctan2(np.abs(p[..., 2]), r2)


@lru_cache(maxsize=64)
def _h1_profile(mu: float, deg: int = 48):
    """Chebyshev fit in psi of J_mu on the unit gauge sphere of H^1."""
    g = heisenberg1()

    def f(psi):
        c = np.cos(psi)
        pts = np.stack([np.sqrt(np.maximum(c, 0.0)), np.zeros_like(psi), np.sin(psi)], axis=-1)
        return homogeneous_time_integral(g, mu, pts)

    cheb = Chebyshev.interpolate(f, deg, domain=[0.0, 0.5 * np.pi])
    # resample on a fine grid: spline lookups are much cheaper than chebval
    grid = np.linspace(0.0, 0.5 * np.pi, 1025)
    return CubicSpline(grid, cheb(grid))


@lru_cache(maxsize=64)
def _euclid_profile(n: int, mu: float) -> float:
    from .group import euclidean
    g = euclidean(n)
    e1 = np.zeros(n)
    e1[0] = 1.0
    return float(homogeneous_time_integral(g, mu, e1))


def time_integral_fast(g: GroupSpec, mu: float, p) -> np.ndarray:
    """J_mu through cached direction profiles and homogeneity."""
    p = np.asarray(p, float)
    rho = gauge(g, p)
    if g.kind == "euclidean":
        return _euclid_profile(g.dim, round(mu, 12)) * rho ** (2 * mu - g.Q)
    if g.kind == "heisenberg1":
        return _h1_profile(round(mu, 12))(_psi(p)) * rho ** (2 * mu - g.Q)
    return homogeneous_time_integral(g, mu, p, tabulated=True)


# ---------------------------------------------------------------------------
# public kernels


def _check_point(g, p):
    p = np.asarray(p, float)
    if p.shape[-1] != g.dim:
        raise ValueError("point dimension does not match group")
    if np.any(np.all(p == 0, axis=-1)):
        raise ValueError("kernel is singular at the identity")
    return p


def riesz_eval(g: GroupSpec, beta: float, p, fast: bool = False,
               scheme: QuadratureScheme = DEFAULT_SCHEME) -> np.ndarray:
    """R_beta(p) for 0 < beta < Q and p != e."""
    if not 0 < beta < g.Q:
        raise ValueError("beta must lie in (0, Q)")
    p = _check_point(g, p)
    mu = 0.5 * beta
    J = time_integral_fast(g, mu, p) if fast else homogeneous_time_integral(g, mu, p, scheme)
    return J / math.gamma(mu)


def rtilde_prefactor(alpha: float) -> float:
    """(alpha/2)/|Gamma(-alpha/2)|; Gamma(-alpha/2) < 0 on (0, 2), the ratio is positive."""
    gm = float(_gamma(-0.5 * alpha))
    if not gm < 0:
        raise ArithmeticError("expected Gamma(-alpha/2) < 0 for alpha in (0, 2)")
    return (0.5 * alpha) / abs(gm)


def riesz_tilde_eval(g: GroupSpec, alpha: float, p, fast: bool = False,
                     scheme: QuadratureScheme = DEFAULT_SCHEME) -> np.ndarray:
    """Rt_alpha(p), positive and homogeneous of degree -alpha - Q."""
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    p = _check_point(g, p)
    mu = -0.5 * alpha
    J = time_integral_fast(g, mu, p) if fast else homogeneous_time_integral(g, mu, p, scheme)
    return rtilde_prefactor(alpha) * J


def levy_kernel(g: GroupSpec, alpha: float, p, fast: bool = True) -> np.ndarray:
    """Kernel K with L^(alpha/2) u(x) = P.V. int (u(x) - u(x w)) K(w) dw; K = (2/alpha) Rt."""
    return (2.0 / alpha) * riesz_tilde_eval(g, alpha, p, fast=fast)


def rho(g: GroupSpec, alpha: float, p, fast: bool = False) -> np.ndarray:
    """Kernel-derived homogeneous norm R_(2-alpha)^(1/(2-alpha-Q)), zero at e."""
    beta = 2.0 - alpha
    if not 0 < beta < g.Q:
        raise ValueError("2 - alpha must lie in (0, Q)")
    p = np.asarray(p, float)
    out = np.zeros(p.shape[:-1])
    nz = np.any(p != 0, axis=-1)
    if np.any(nz):
        out[nz] = riesz_eval(g, beta, p[nz], fast=fast) ** (1.0 / (beta - g.Q))
    return out


def riesz_h1_lambda(beta: float, p, panels: int = 80) -> np.ndarray:
    """Oracle for R_beta on H^1 with the time integral done in closed form (needs r > 0).

    R_beta = Gamma(2 - beta/2) / (32 pi^2 Gamma(beta/2))
             int_R (lam/sinh lam) Re[((r^2 lam coth lam - i lam z)/4)^(beta/2 - 2)] d lam
    """
    p = np.asarray(p, float)
    r2 = p[..., 0] ** 2 + p[..., 1] ** 2
    if np.any(r2 == 0):
        raise ValueError("closed-form route needs r > 0")
    u, w = composite_gauss(panels, math.log(1e-10), math.log(60.0))
    lam = np.exp(u)
    ls = lam / np.sinh(lam)
    lc = lam / np.tanh(lam)
    A = (r2[..., None] * lc - 1j * lam * p[..., 2][..., None]) / 4.0
    f = ls * np.real(A ** (0.5 * beta - 2.0)) * lam
    head = 1e-10 * np.real((r2 / 4.0) ** (0.5 * beta - 2.0))
    I = 2.0 * (f @ w + head)
    return math.gamma(2.0 - 0.5 * beta) / (32 * np.pi ** 2 * math.gamma(0.5 * beta)) * I


def riesz_euclid_closed(n: int, beta: float, p) -> np.ndarray:
    """Classical Riesz kernel Gamma((n-beta)/2) / (4^(beta/2) pi^(n/2) Gamma(beta/2)) |p|^(beta-n)."""
    r = np.linalg.norm(np.asarray(p, float), axis=-1)
    c = math.gamma(0.5 * (n - beta)) / (4 ** (0.5 * beta) * np.pi ** (0.5 * n) * math.gamma(0.5 * beta))
    return c * r ** (beta - n)


def riesz_euclid_continued(n: int, beta: float, p) -> np.ndarray:
    """Riesz kernel of R^n continued to n <= beta < n + 2, up to an additive constant.

    For beta = n it is -2 log|p| / ((4 pi)^(n/2) Gamma(n/2)); otherwise the
    classical power with its (then negative) constant.  Only meaningful when
    paired with functions of zero mean, such as L u.
    """
    r = np.linalg.norm(np.asarray(p, float), axis=-1)
    if not 0 < beta < n + 2:
        raise ValueError("beta must lie in (0, n + 2)")
    if abs(beta - n) < 1e-12:
        return -2.0 * np.log(r) / ((4 * np.pi) ** (0.5 * n) * math.gamma(0.5 * n))
    return riesz_euclid_closed(n, beta, p)


# ---------------------------------------------------------------------------
# Poisson kernel


def _check_a(a):
    if not -1.0 < a < 1.0:
        raise ValueError("a must lie in (-1, 1)")


def poisson_eval_quadrature(g: GroupSpec, a: float, p, y: float, nodes: int = 768,
                            tabulated: bool = False) -> np.ndarray:
    """P(p, y) by direct log-time quadrature around t = (gauge^2 + y^2)/4."""
    _check_a(a)
    if not y > 0:
        raise ValueError("y must be positive")
    p = np.asarray(p, float)
    Ca = params_from_a(a).C_a
    tau = 0.25 * (gauge(g, p) ** 2 + y * y)
    s, w = composite_gauss(nodes // 16, -12.0, 18.0)
    flat = p.reshape(-1, g.dim)
    tf = tau.reshape(-1)
    out = np.empty(flat.shape[0])
    prov = HeatProvider(g, tabulated=tabulated)
    ex = 0.5 * (a - 3.0)
    for i in range(flat.shape[0]):
        t = tf[i] * np.exp(s)
        hv = heat_eval(prov, 1.0, flat[i][None, :] * (1.0 / np.sqrt(t))[:, None] ** g.d) * t ** (-0.5 * g.Q)
        f = t ** ex * np.exp(-y * y / (4.0 * t)) * hv * t
        tail_t = tf[i] * math.exp(18.0)
        # beyond: h ~ h(1, e) t^(-Q/2), exp(-y^2/4t) ~ 1
        e2 = ex - 0.5 * g.Q + 1.0
        tail = heat_at_origin(g) * tail_t ** e2 / (-e2)
        out[i] = f @ w + tail
    return Ca * y ** (1.0 - a) * out.reshape(p.shape[:-1])


def poisson_h1_lambda(a: float, p, y: float, panels: int = 48) -> np.ndarray:
    """P(p, y) on H^1 with the time integral done in closed form.

    P = C_a y^(1-a) Gamma((5-a)/2) / (32 pi^2)
        int_R (lam/sinh lam) Re[((y^2 + r^2 lam coth lam - i lam z)/4)^(-(5-a)/2)] d lam
    """
    _check_a(a)
    p = np.asarray(p, float)
    Ca = params_from_a(a).C_a
    mu = 0.5 * (5.0 - a)
    lo = 1e-12
    u, w = composite_gauss(panels, math.log(lo), math.log(60.0))
    lam = np.exp(u)
    ls = lam / np.sinh(lam)
    lc = lam / np.tanh(lam)
    r2 = (p[..., 0] ** 2 + p[..., 1] ** 2)[..., None]
    z = p[..., 2][..., None]
    A = (y * y + r2 * lc - 1j * lam * z) / 4.0
    f = ls * np.real(A ** (-mu)) * lam
    head = lo * ((y * y + r2[..., 0]) / 4.0) ** (-mu)
    I = 2.0 * (f @ w + head)
    return Ca * y ** (1.0 - a) * math.gamma(mu) / (32 * np.pi ** 2) * I


def poisson_euclid_closed(n: int, a: float, p, y: float) -> np.ndarray:
    """C_a y^(1-a) (4 pi)^(-n/2) Gamma((n+1-a)/2) ((y^2+|p|^2)/4)^(-(n+1-a)/2)."""
    _check_a(a)
    r2 = np.sum(np.asarray(p, float) ** 2, axis=-1)
    mu = 0.5 * (n + 1 - a)
    Ca = params_from_a(a).C_a
    return Ca * y ** (1 - a) * (4 * np.pi) ** (-0.5 * n) * math.gamma(mu) * ((y * y + r2) / 4) ** (-mu)


@lru_cache(maxsize=16)
def _poisson_h1_table(a: float):
    """log P(., 1) on H^1 over (log rho, psi)."""
    lr = np.linspace(-9.0, 9.0, 181)
    psi = np.linspace(0.0, 0.5 * np.pi, 41)
    R, S = np.meshgrid(np.exp(lr), psi, indexing="ij")
    c = np.cos(S)
    pts = np.stack([R * np.sqrt(np.maximum(c, 0)), np.zeros_like(R), R * R * np.sin(S)], axis=-1)
    vals = np.empty(R.shape)
    for i in range(R.shape[0]):
        vals[i] = poisson_h1_lambda(a, pts[i], 1.0, panels=64)
    return RectBivariateSpline(lr, psi, np.log(vals), kx=3, ky=3), lr[0], lr[-1], a


def _poisson_h1_fast(a, p, y):
    spl, lo, hi, _ = _poisson_h1_table(round(a, 12))
    q = dilate(heisenberg1(), 1.0 / y, p)
    rho_ = gauge(heisenberg1(), q)
    lr = np.log(np.maximum(rho_, 1e-300))
    psi = _psi(q)
    inner = np.clip(lr, lo, hi)
    val = spl.ev(inner, psi)
    # power-law continuation beyond the table
    slope = -(4.0 + 1.0 - a)
    val = val + np.where(lr > hi, slope * (lr - hi), 0.0)
    return np.exp(val) / y ** 4


def poisson_eval(g: GroupSpec, a: float, p, y: float, fast: bool = False) -> np.ndarray:
    """Poisson kernel P(p, y) >= 0 of the extension problem."""
    _check_a(a)
    if not y > 0:
        raise ValueError("y must be positive")
    p = np.asarray(p, float)
    if p.shape[-1] != g.dim:
        raise ValueError("point dimension does not match group")
    if g.kind == "heisenberg1":
        return _poisson_h1_fast(a, p, y) if fast else poisson_h1_lambda(a, p, y)
    if g.kind == "euclidean":
        return _poisson_euclid_quad(g.dim, a, p, y)
    return poisson_eval_quadrature(g, a, p, y, tabulated=True)


@lru_cache(maxsize=32)
def _poisson_euclid_profile(n: int, a: float):
    """log P(r e_1, 1) on a log-r grid, computed by the time integral."""
    from .group import euclidean
    g = euclidean(n)
    lr = np.linspace(-9.0, 9.0, 361)
    pts = np.zeros((lr.size, n))
    pts[:, 0] = np.exp(lr)
    vals = poisson_eval_quadrature(g, a, pts, 1.0)
    return CubicSpline(lr, np.log(vals)), lr[0], lr[-1]


def _poisson_euclid_quad(n, a, p, y):
    spl, lo, hi = _poisson_euclid_profile(n, round(a, 12))
    r = np.linalg.norm(p, axis=-1) / y
    lr = np.log(np.maximum(r, 1e-300))
    val = spl(np.clip(lr, lo, hi))
    val = val + np.where(lr > hi, -(n + 1 - a) * (lr - hi), 0.0)
    return np.exp(val) / y ** n


def poisson_kernel_cells(g: GroupSpec, a: float, y: float, lattice, extent=None) -> np.ndarray:
    extent = kernel_extent(g, lattice) if extent is None else extent
    fn = lambda pts: poisson_eval(g, a, pts, y, fast=True)
    return scaled_kernel_cells(g, lattice, extent, fn, y)


def poisson_convolve(g: GroupSpec, u: GridFunction, a: float, y: float, out_slices=None) -> GridFunction:
    """v(., y) = u * P(., y) as a discrete group convolution."""
    _check_a(a)
    if not y > 0:
        raise ValueError("y must be positive")
    lat = u.lattice
    kc = poisson_kernel_cells(g, a, y, lat)
    vals = group_convolve(g, lat, u.values, kc, out_slices)
    return GridFunction(lat, vals, np.isfinite(vals))


# ---------------------------------------------------------------------------
# singular kernels on lattices


def homogeneous_kernel_cells(g: GroupSpec, lattice, extent, fn, degree: float,
                             near: int = 2) -> np.ndarray:
    """Cell integrals of a kernel homogeneous of ``degree`` (> -Q) on the offset lattice.

    The origin cell uses the dyadic shell identity; cells within ``near`` of
    the origin are integrated adaptively; the rest use point values.
    """
    half = 0.5 * lattice.h
    origin = origin_box_integral(fn, half, g.d, degree, q=4, rtol=1e-6)
    return cell_weights(lattice, extent, fn, near=near, q=4, rtol=1e-6, origin=origin)


def riesz_kernel_cells(g: GroupSpec, beta: float, lattice, extent=None, near: int = 2) -> np.ndarray:
    extent = kernel_extent(g, lattice) if extent is None else extent
    if g.kind == "euclidean" and beta >= g.Q:
        fn = lambda pts: riesz_euclid_continued(g.dim, beta, pts)
        return cell_weights(lattice, extent, fn, near=near, q=6, rtol=1e-9)
    fn = lambda pts: riesz_eval(g, beta, pts, fast=True)
    return homogeneous_kernel_cells(g, lattice, extent, fn, beta - g.Q, near)


def box_exterior_integral(g: GroupSpec, fn, degree: float, half) -> float:
    """Integral of a kernel homogeneous of ``degree`` (< -Q) outside a centred box."""
    return exterior_box_integral(fn, half, g.d, degree)


def fit_type_constants(values, radii, exponent):
    """Constants m, M with m r^exponent <= values <= M r^exponent."""
    ratio = np.asarray(values) / np.asarray(radii) ** exponent
    return float(ratio.min()), float(ratio.max())


def gauge_sphere_flux(g: GroupSpec, fn, radius: float, n_ang: int = 48, step: float = 1e-4) -> float:
    """Outward flux of the horizontal gradient of ``fn`` through {gauge = radius}.

    Uses flux = int (nabla_G fn . nabla_G gauge) radius^(Q-1) d(angles), with
    Korányi polar angles on H^1 and spherical angles on R^3.  Horizontal
    derivatives are centred differences along the field directions.
    """
    from .group import field_matrix
    from .quad import gauss_legendre
    th, wt = gauss_legendre(2 * n_ang, 0.0, 2 * np.pi)
    if g.kind == "heisenberg1":
        ps, wp = gauss_legendre(n_ang, -0.5 * np.pi, 0.5 * np.pi)
        P, T = np.meshgrid(ps, th, indexing="ij")
        rc = np.sqrt(np.cos(P))
        pts = np.stack([radius * rc * np.cos(T), radius * rc * np.sin(T),
                        radius ** 2 * np.sin(P)], axis=-1)
        jac = radius ** 3 * np.ones_like(P)
    elif g.kind == "euclidean" and g.dim == 3:
        ps, wp = gauss_legendre(n_ang, 0.0, np.pi)
        P, T = np.meshgrid(ps, th, indexing="ij")
        pts = radius * np.stack([np.sin(P) * np.cos(T), np.sin(P) * np.sin(T), np.cos(P)], axis=-1)
        jac = radius ** 2 * np.sin(P)
    else:
        raise ValueError("flux helper supports heisenberg1 and euclidean(3)")
    W = np.outer(wp, wt) * jac
    frame = field_matrix(g, pts)
    first = g.d == 1
    r2 = np.sum(pts[..., first] ** 2, axis=-1)
    rho_ = gauge(g, pts)
    grad = np.where(first, r2[..., None] * pts, 0.5 * pts) / rho_[..., None] ** 3
    total = np.zeros(P.shape)
    for j in range(g.m):
        c = frame[..., j, :]
        dfn = (fn(pts + step * c) - fn(pts - step * c)) / (2 * step)
        total += dfn * np.sum(c * grad, axis=-1)
    return float(np.sum(total * W))


def riesz_convolution_rule(g: GroupSpec, alpha: float, beta: float, lattice, shell=(0.5, 1.0)) -> dict:
    """Compare the lattice convolution R_alpha * R_beta with R_(alpha+beta) in a gauge shell.

    R_alpha is sampled on ``lattice`` (cell averages), convolved with the cell
    weights of R_beta, and the part of the integral outside the lattice box is
    added from homogeneity: for targets well inside the box the integrand
    there is close to R_alpha(w) R_beta(w).  Returns relative L1 errors with
    and without that tail term.
    """
    if not (0 < alpha and 0 < beta and alpha + beta < g.Q):
        raise ValueError("need alpha, beta > 0 with alpha + beta < Q")
    ua = riesz_kernel_cells(g, alpha, lattice, extent=lattice.extent) / lattice.cell_volume
    kb = riesz_kernel_cells(g, beta, lattice)
    out = group_convolve(g, lattice, ua, kb)
    half = (np.asarray(lattice.extent) + 0.5) * lattice.h
    fn = lambda p: riesz_eval(g, alpha, p, fast=True) * riesz_eval(g, beta, p, fast=True)
    tail = box_exterior_integral(g, fn, alpha + beta - 2 * g.Q, half)
    pts = lattice.points()
    gg = gauge(g, pts)
    sel = (gg >= shell[0]) & (gg <= shell[1])
    ref = riesz_eval(g, alpha + beta, pts[sel], fast=True)
    l1 = lambda v: float(np.sum(np.abs(v - ref)) / np.sum(np.abs(ref)))
    return {"relative_l1": l1(out[sel] + tail), "relative_l1_untailed": l1(out[sel]),
            "tail": float(tail), "points": int(sel.sum())}


def poisson_mass(g: GroupSpec, a: float, y: float, lattice) -> tuple:
    """(lattice cell sum, exterior tail) of P(., y); their total should be 1.

    Far from the origin P(p, y) ~ C_a y^(1-a) J_((a-1)/2)(p), which is
    homogeneous of degree a - 1 - Q; the tail integrates that outside the box.
    """
    _check_a(a)
    kc = poisson_kernel_cells(g, a, y, lattice, extent=lattice.extent)
    mu = 0.5 * (a - 1.0)
    half = (np.asarray(lattice.extent) + 0.5) * lattice.h
    far = box_exterior_integral(g, lambda q: time_integral_fast(g, mu, q), a - 1.0 - g.Q, half)
    return float(kc.sum()), float(params_from_a(a).C_a * y ** (1.0 - a) * far)
