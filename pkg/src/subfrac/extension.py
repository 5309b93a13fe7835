"""The lifting v(x, y), its even reflection, the weighted PDE and the Neumann trace.

The lifting of u is v(., y) = phi(theta y^(1-a) L^((1-a)/2)) u.  It can be
built spectrally (through the discrete operator on a box) or by convolving u
with the Poisson kernel P(., y); the two agree up to discretisation and box
truncation, which is the content of the subordination identity.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .group import GridFunction, GroupSpec, Lattice, apply_field
from .kernels import poisson_convolve
from .spectral import (DiscreteOperator, SpectralDecomposition, assemble_sublaplacian,
                       lanczos_apply)
from .special import params_from_a, phi


@dataclass(eq=False)
class ExtensionField:
    """Values v[k] = v(., y_k) on a base lattice for an increasing y-grid."""

    lattice: Lattice
    ygrid: np.ndarray
    values: np.ndarray
    a: float

    def __post_init__(self):
        self.ygrid = np.asarray(self.ygrid, float)
        self.values = np.asarray(self.values, float)
        if np.any(np.diff(self.ygrid) <= 0):
            raise ValueError("y-grid must be strictly increasing")
        if self.values.shape != (self.ygrid.size,) + self.lattice.shape:
            raise ValueError("values must have shape (len(ygrid),) + lattice.shape")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("extension values must be finite")

    def level(self, y: float) -> GridFunction:
        k = int(np.argmin(np.abs(self.ygrid - y)))
        if not np.isclose(self.ygrid[k], y, rtol=0, atol=1e-12):
            raise ValueError(f"y = {y} is not on the grid")
        return GridFunction(self.lattice, self.values[k])


def _check_grid(ygrid, nonneg=True):
    y = np.asarray(ygrid, float)
    if nonneg and np.any(y < 0):
        raise ValueError("lift y-grid must be nonnegative")
    return y


def lift_profile(a: float, y: float, lam: np.ndarray) -> np.ndarray:
    """phi(theta y^(1-a) lambda^((1-a)/2)), the spectral multiplier of the lift."""
    p = params_from_a(a)
    return phi(p, p.theta * y ** (1.0 - a) * np.maximum(lam, 0.0) ** p.s)


def lift_spectral(S, a: float, u: GridFunction, ygrid) -> ExtensionField:
    """Spectral lift; ``S`` is a SpectralDecomposition or (large case) a DiscreteOperator."""
    params_from_a(a)
    y = _check_grid(ygrid)
    out = np.empty((y.size,) + u.lattice.shape)
    if isinstance(S, SpectralDecomposition):
        op = S.operator
        c = S.eigenvectors.T @ op.restrict(u)
        for k, yk in enumerate(y):
            out[k] = op.extend(S.eigenvectors @ (lift_profile(a, yk, S.eigenvalues) * c)).values
    elif isinstance(S, DiscreteOperator):
        op = S
        b = op.restrict(u)
        for k, yk in enumerate(y):
            x, _ = lanczos_apply(op.matrix, lambda lam: lift_profile(a, yk, lam), b, tol=1e-10)
            out[k] = op.extend(x).values
    else:
        raise TypeError("expected a SpectralDecomposition or DiscreteOperator")
    for k, yk in enumerate(y):
        if yk == 0:
            out[k] = np.where(op.interior, u.values, 0.0)
    return ExtensionField(u.lattice, y, out, a)


def lift_poisson(g: GroupSpec, a: float, u: GridFunction, ygrid) -> ExtensionField:
    """Lift by convolution with the Poisson kernel at each positive level."""
    params_from_a(a)
    y = _check_grid(ygrid)
    out = np.empty((y.size,) + u.lattice.shape)
    for k, yk in enumerate(y):
        out[k] = u.values if yk == 0 else poisson_convolve(g, u, a, float(yk)).values
    return ExtensionField(u.lattice, y, out, a)


def even_reflect(v: ExtensionField) -> ExtensionField:
    """Continue v evenly to negative y (a level at y = 0 is kept once)."""
    y = v.ygrid
    if y[0] < 0:
        raise ValueError("field already extends to negative y")
    start = 1 if y[0] == 0 else 0
    yy = np.concatenate([-y[start:][::-1], y])
    vals = np.concatenate([v.values[start:][::-1], v.values])
    return ExtensionField(v.lattice, yy, vals, v.a)


def staggered_ygrid(eps: float, ymax: float) -> np.ndarray:
    """Nonnegative levels eps/2, 3 eps/2, ... up to ymax (no level at 0)."""
    n = int(np.floor(ymax / eps + 0.5))
    return eps * (np.arange(n) + 0.5)


def _flux_weights(y: np.ndarray, a: float) -> np.ndarray:
    """Effective |y|^a between neighbouring levels: gap / int |y|^(-a) dy over the gap.

    Exact for the one-dimensional flux and finite even when a gap contains 0.
    """
    def F(t):  # antiderivative of |t|^(-a)
        return np.sign(t) * np.abs(t) ** (1.0 - a) / (1.0 - a)
    gap = np.diff(y)
    return gap / (F(y[1:]) - F(y[:-1]))


def pde_residual(g: GroupSpec, vhat: ExtensionField, op: DiscreteOperator | None = None) -> np.ndarray:
    """-|y|^a L v + d_y(|y|^a d_y v) at the inner y-levels.

    Returns an array of shape (len(ygrid) - 2,) + lattice.shape; the y-part
    uses flux weights between levels, L is the compact stencil with zero
    exterior values (NaN off the operator's interior).
    """
    y = vhat.ygrid
    a = vhat.a
    if y.size < 3:
        raise ValueError("need at least three y-levels")
    if np.any(y[1:-1] == 0):
        raise ValueError("y = 0 is a stencil centre; use a grid staggered about 0")
    lat = vhat.lattice
    op = assemble_sublaplacian(g, lat) if op is None else op
    w = _flux_weights(y, a)
    v = vhat.values
    flux = w.reshape((-1,) + (1,) * lat.ndim) * np.diff(v, axis=0) / np.diff(y).reshape((-1,) + (1,) * lat.ndim)
    dy = 0.5 * (y[2:] - y[:-2])
    ypart = np.diff(flux, axis=0) / dy.reshape((-1,) + (1,) * lat.ndim)
    res = np.full((y.size - 2,) + lat.shape, np.nan)
    for k in range(1, y.size - 1):
        Lv = op.extend(op.matrix @ op.restrict(v[k])).values
        r = -np.abs(y[k]) ** a * Lv + ypart[k - 1]
        res[k - 1] = np.where(op.interior, r, np.nan)
    return res


def residual_norm(g: GroupSpec, vhat: ExtensionField, ymin: float = 0.0,
                  op: DiscreteOperator | None = None) -> tuple:
    """(l2 norm of the residual, l2 norm of the |y|^a L v term) over |y| >= ymin.

    Both norms carry the cell volume times the y-spacing.
    """
    op = assemble_sublaplacian(g, vhat.lattice) if op is None else op
    res = pde_residual(g, vhat, op)
    y = vhat.ygrid[1:-1]
    dy = 0.5 * (vhat.ygrid[2:] - vhat.ygrid[:-2])
    vol = vhat.lattice.cell_volume
    num = den = 0.0
    for k in range(y.size):
        if abs(y[k]) < ymin:
            continue
        r = res[k][op.interior]
        Lv = np.abs(y[k]) ** vhat.a * (op.matrix @ op.restrict(vhat.values[k + 1]))
        num += np.sum(r * r) * vol * dy[k]
        den += np.sum(Lv * Lv) * vol * dy[k]
    return float(np.sqrt(num)), float(np.sqrt(den))


@dataclass
class TraceResult:
    eps: np.ndarray
    quotients: np.ndarray        # eps^a (v(eps) - v(0)) / eps, one row per eps
    quotient_limit: np.ndarray   # Richardson limit of the quotients
    derivative_limit: np.ndarray  # (1 - a) * quotient_limit, the limit of eps^a d_y v

    def table(self):
        return [(float(e), float(np.linalg.norm(q))) for e, q in zip(self.eps, self.quotients)]


def neumann_trace(v: ExtensionField, eps) -> TraceResult:
    """Weighted difference quotients at the given levels and their extrapolated limit.

    The quotient converges like Q(eps) = A + B eps^(1+a) + O(eps^2), so two
    levels are combined with Richardson exponent 1 + a.  Since
    v(y) - v(0) ~ c y^(1-a), the limit of eps^a d_y v equals (1 - a) times the
    limit of the quotient.
    """
    a = v.a
    eps = np.asarray(eps, float)
    if eps.size < 2 or np.any(np.diff(eps) >= 0):
        raise ValueError("eps must be a decreasing list of at least two levels")
    if v.ygrid[0] != 0:
        raise ValueError("the y-grid must contain 0")
    positive = v.ygrid[v.ygrid > 0]
    if eps[-1] < positive.min() - 1e-15:
        raise ValueError("eps below the y-grid resolution")
    base = v.level(0.0).values
    Q = np.stack([e ** a * (v.level(e).values - base) / e for e in eps])
    r = (eps[-2] / eps[-1]) ** (1.0 + a)
    lim = (r * Q[-1] - Q[-2]) / (r - 1.0)
    return TraceResult(eps, Q, lim, (1.0 - a) * lim)


def weighted_energy(g: GroupSpec, v: ExtensionField, ymax: float = 1.0) -> float:
    """sum |y|^a (|nabla_G v|^2 + |d_y v|^2) vol dy over 0 < y <= ymax (midpoint in y)."""
    y = v.ygrid
    a = v.a
    lat = v.lattice
    total = 0.0
    for k in range(y.size - 1):
        if y[k] < 0 or y[k + 1] > ymax + 1e-12:
            continue
        dy = y[k + 1] - y[k]
        mid = GridFunction(lat, 0.5 * (v.values[k] + v.values[k + 1]))
        grad2 = np.zeros(lat.shape)
        for j in range(g.m):
            grad2 += np.nan_to_num(apply_field(g, j, mid).values) ** 2
        dv = (v.values[k + 1] - v.values[k]) / dy
        # int of |y|^a over the gap keeps the a < 0 endpoint singularity exact
        wint = (y[k + 1] ** (1 + a) - y[k] ** (1 + a)) / (1 + a)
        total += float(np.sum(grad2 * wint + dv * dv * wint)) * lat.cell_volume
    return total
