"""Three independent computations of L^(alpha/2) u and their comparison.

* ``spectral``: lambda^(alpha/2) applied through the discrete operator on the
  box (zero exterior values).
* ``pv``: the principal-value integral P.V. int (u(x) - u(x w)) K(w) dw with
  K = (2/alpha) Rt_alpha, symmetrised with the semicheck map.  Offsets in a
  small box around e are replaced by the second-order Taylor term (the odd
  terms cancel under the pairing w <-> semicheck(w)), the rest is a discrete
  group convolution, and the part outside the kernel box is integrated
  exactly against u(x).
* ``riesz``: Lu * R_(2-alpha), with the integrable singular cell of
  R_(2-alpha) integrated by the dyadic shell identity.

Sign convention: every route returns the positive operator, so on an
eigenfunction with eigenvalue lambda the result is lambda^(alpha/2) times it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.ndimage import map_coordinates

from .conv import cell_weights, exterior_box_integral, group_convolve, kernel_extent, origin_box_integral
from .group import (GridFunction, GroupSpec, Lattice, gauge, mult, semicheck,
                    sublaplacian_compact)
from .kernels import levy_kernel, riesz_kernel_cells
from .spectral import fractional_apply

NEAR = 2


def _check_alpha(alpha):
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")


def _values(u):
    return u.values if isinstance(u, GridFunction) else np.asarray(u, float)


# ---------------------------------------------------------------------------
# P.V. route


@dataclass(frozen=True)
class PVWeights:
    """Quadrature pieces of the P.V. route on one lattice."""

    far: np.ndarray          # K cell weights with the near box zeroed
    far_sum: float           # sum of ``far``
    second_moment: float     # int over near box of w_1^2 K
    exterior: float          # int of K outside the kernel box
    near_half: np.ndarray    # half-widths of the near box


def _lattice_key(lat: Lattice):
    return (lat.spacing, lat.extent)


@lru_cache(maxsize=16)
def _pv_weights_cached(g: GroupSpec, alpha: float, spacing, extent, near: int) -> PVWeights:
    lat = Lattice(spacing, extent)
    ext = kernel_extent(g, lat)
    fn = lambda p: levy_kernel(g, alpha, p)
    kc = cell_weights(lat, ext, fn, near=near + 2, q=4, rtol=1e-6, origin=0.0)
    e = np.asarray(ext)
    box = tuple(slice(k - near, k + near + 1) for k in e)
    kc[box] = 0.0
    h = lat.h
    near_half = (near + 0.5) * h
    c = g.horizontal[0]
    mom = origin_box_integral(lambda p: p[:, c] ** 2 * fn(p), near_half, g.d,
                              2.0 - alpha - g.Q, q=4, rtol=1e-7)
    ext_half = (e + 0.5) * h
    tail = exterior_box_integral(fn, ext_half, g.d, -alpha - g.Q, q=4, rtol=1e-7)
    return PVWeights(kc, float(kc.sum()), float(mom), float(tail), near_half)


def pv_weights(g: GroupSpec, alpha: float, lattice: Lattice, near: int = NEAR) -> PVWeights:
    _check_alpha(alpha)
    return _pv_weights_cached(g, round(float(alpha), 12), lattice.spacing, lattice.extent, near)


def frac_pv_field(g: GroupSpec, alpha: float, u, lattice: Lattice | None = None,
                  near: int = NEAR) -> GridFunction:
    """L^(alpha/2) u at every node by the symmetrised principal-value integral."""
    lat = u.lattice if isinstance(u, GridFunction) else lattice
    v = _values(u)
    W = pv_weights(g, alpha, lat, near)
    Lu = np.nan_to_num(sublaplacian_compact(g, GridFunction(lat, v)).values)
    conv = group_convolve(g, lat, v, W.far)
    out = 0.5 * W.second_moment * Lu + v * (W.far_sum + W.exterior) - conv
    valid = lat.interior_mask(1)
    return GridFunction(lat, out, valid)


def _interp(lat: Lattice, v: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Cubic interpolation of lattice values at arbitrary points (zero outside)."""
    idx = (pts - np.asarray(lat.origin)) / lat.h + np.asarray(lat.extent)
    return map_coordinates(v, idx.reshape(-1, lat.ndim).T, order=3, mode="constant",
                           cval=0.0).reshape(pts.shape[:-1])


def frac_singular_integral(g: GroupSpec, alpha: float, u: GridFunction, x, truncation: float,
                           near: int = NEAR, exterior: str = "zero"):
    """L^(alpha/2) u(x) at one node with offsets truncated at gauge ``truncation``.

    Pairs each offset w with its semicheck image, so the summand is
    u(x) - (u(x w) + u(x semicheck(w)))/2.  Off-lattice values are cubically
    interpolated.  Returns ``(value, tail_bound)``; the bound is
    (int_{gauge > R} K) * max|u|, the size of the far field that the
    truncation misrepresents.

    ``exterior="zero"`` treats u(x w) as zero beyond the truncation radius
    and adds u(x) int_{gauge > R} K; ``exterior="truncate"`` drops that
    region, i.e. evaluates the truncated operator (which kills constants).
    """
    _check_alpha(alpha)
    if exterior not in ("zero", "truncate"):
        raise ValueError("exterior must be 'zero' or 'truncate'")
    lat = u.lattice
    h = lat.h
    if truncation < 3 * h.max():
        raise ValueError("truncation radius must be at least 3 h")
    if truncation < float(gauge(g, (near + 0.5) * h)):
        raise ValueError("truncation ball must contain the near box")
    x = np.asarray(x, float)
    ix = np.asarray(lat.index_of(x))
    if np.any(ix < 2) or np.any(ix > np.asarray(lat.shape) - 3):
        raise ValueError("x is too close to the lattice boundary")
    v = u.values
    fn = lambda p: levy_kernel(g, alpha, p)
    # offsets inside the truncation box
    ext = tuple(int(np.ceil(truncation ** dd / hh)) for dd, hh in zip(g.d, h))
    kc = cell_weights(lat, ext, fn, near=near + 2, q=4, rtol=1e-6, origin=0.0)
    off = np.stack(np.meshgrid(*[hh * np.arange(-e, e + 1) for hh, e in zip(h, ext)],
                               indexing="ij"), axis=-1)
    k = np.indices(kc.shape) - np.asarray(ext).reshape((-1,) + (1,) * len(ext))
    in_near = np.all(np.abs(k) <= near, axis=0)
    keep = (~in_near) & (gauge(g, off) <= truncation)
    w = off[keep]
    kw = kc[keep]
    ux = v[tuple(ix)]
    pair = 0.5 * (_interp(lat, v, mult(g, x, w)) + _interp(lat, v, mult(g, x, semicheck(g, w))))
    far = np.sum((ux - pair) * kw)
    # near box: second-order Taylor term
    c = g.horizontal[0]
    near_half = (near + 0.5) * h
    mom = origin_box_integral(lambda p: p[:, c] ** 2 * fn(p), near_half, g.d,
                              2.0 - alpha - g.Q, q=4, rtol=1e-7)
    Lu = sublaplacian_compact(g, u).values[tuple(ix)]
    # exterior of the gauge ball (u(x w) taken as zero there)
    tail_mass = sphere_mass(g, alpha) * truncation ** (-alpha) / alpha
    value = far + 0.5 * mom * Lu + (ux * tail_mass if exterior == "zero" else 0.0)
    return float(value), float(tail_mass * np.max(np.abs(v)))


@lru_cache(maxsize=32)
def _sphere_mass(g: GroupSpec, alpha: float, n_ang: int = 64) -> float:
    """int over the unit gauge sphere (polar measure) of K, so int_{gauge>R} K = mass R^-alpha / alpha."""
    from .quad import gauss_legendre
    if g.kind == "heisenberg1":
        ps, wp = gauss_legendre(n_ang, -0.5 * np.pi, 0.5 * np.pi)
        rc = np.sqrt(np.cos(ps))
        pts = np.stack([rc, np.zeros_like(ps), np.sin(ps)], axis=-1)
        return float(2 * np.pi * np.sum(wp * levy_kernel(g, alpha, pts)))
    if g.kind == "euclidean":
        from math import gamma, pi
        n = g.dim
        area = 2 * pi ** (n / 2) / gamma(n / 2)
        e1 = np.zeros((1, n))
        e1[0, 0] = 1.0
        return float(area * levy_kernel(g, alpha, e1)[0])
    raise ValueError("sphere mass needs heisenberg1 or euclidean")


def sphere_mass(g: GroupSpec, alpha: float) -> float:
    return _sphere_mass(g, round(float(alpha), 12))


# ---------------------------------------------------------------------------
# composition route


def frac_via_riesz_composition(g: GroupSpec, alpha: float, u: GridFunction) -> GridFunction:
    """L^(alpha/2) u = (L u) * R_(2-alpha)."""
    _check_alpha(alpha)
    lat = u.lattice
    if any(e < 2 for e in lat.extent):
        raise ValueError("lattice too small")
    Lu = np.nan_to_num(sublaplacian_compact(g, u).values)
    kc = _riesz_cells_cached(g, round(2.0 - alpha, 12), lat.spacing, lat.extent)
    out = group_convolve(g, lat, Lu, kc)
    return GridFunction(lat, out, lat.interior_mask(1))


@lru_cache(maxsize=16)
def _riesz_cells_cached(g, beta, spacing, extent):
    return riesz_kernel_cells(g, beta, Lattice(spacing, extent))


# ---------------------------------------------------------------------------
# spectral route and the Fourier oracle


def frac_spectral(g: GroupSpec, alpha: float, u: GridFunction) -> GridFunction:
    _check_alpha(alpha)
    out = fractional_apply(g, u.lattice, 0.5 * alpha, u)
    return GridFunction(u.lattice, out.values, u.lattice.interior_mask(1))


def frac_fft_oracle(g: GroupSpec, alpha: float, u: GridFunction, pad: int = 4) -> GridFunction:
    """Inverse transform of |xi|^alpha u_hat on a zero-padded periodic box (euclidean only)."""
    if g.kind != "euclidean":
        raise ValueError("the Fourier oracle needs a euclidean group")
    if not 0 <= alpha <= 2:
        raise ValueError("alpha must lie in [0, 2]")
    lat = u.lattice
    shape = tuple(pad * s for s in lat.shape)
    uh = np.fft.fftn(u.values, s=shape, axes=tuple(range(len(shape))))
    xi2 = np.zeros(shape)
    for ax, (n, hh) in enumerate(zip(shape, lat.h)):
        k = 2 * np.pi * np.fft.fftfreq(n, d=hh)
        sh = [1] * len(shape)
        sh[ax] = n
        xi2 = xi2 + (k ** 2).reshape(sh)
    out = np.real(np.fft.ifftn(uh * xi2 ** (0.5 * alpha), axes=tuple(range(len(shape)))))
    sl = tuple(slice(0, s) for s in lat.shape)
    return GridFunction(lat, out[sl])


# ---------------------------------------------------------------------------
# cross validation


@dataclass
class FracReport:
    alpha: float
    routes: dict
    discrepancies: dict
    tolerance: float
    region: np.ndarray = field(repr=False, default=None)
    metadata: dict = field(default_factory=dict)

    @property
    def max_discrepancy(self) -> float:
        return max(self.discrepancies.values()) if self.discrepancies else 0.0

    @property
    def passed(self) -> bool:
        return self.max_discrepancy <= self.tolerance

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "discrepancies": {f"{a}|{b}": v for (a, b), v in
                                                       self.discrepancies.items()},
                "max_discrepancy": self.max_discrepancy, "tolerance": self.tolerance,
                "passed": self.passed, "metadata": self.metadata}


def relative_l2(a: np.ndarray, b: np.ndarray) -> float:
    """|a - b| / (mean of |a| and |b|), zero when both vanish."""
    den = 0.5 * (np.linalg.norm(a) + np.linalg.norm(b))
    return 0.0 if den == 0 else float(np.linalg.norm(a - b) / den)


def comparison_region(lat: Lattice, fraction: float = 0.5) -> np.ndarray:
    """Nodes in the inner ``fraction`` of the box on every axis."""
    pts = lat.points()
    lim = fraction * lat.h * np.asarray(lat.extent)
    return np.all(np.abs(pts - np.asarray(lat.origin)) <= lim + 1e-12, axis=-1)


ROUTES = ("spectral", "pv", "riesz")


def cross_validate(g: GroupSpec, alpha: float, u: GridFunction, routes=None,
                   tolerance: float = 0.07, fraction: float = 0.5) -> FracReport:
    """Run the applicable routes and report pairwise relative l2 discrepancies."""
    _check_alpha(alpha)
    routes = list(ROUTES if routes is None else routes)
    if g.kind == "euclidean" and "fft" not in routes and routes == list(ROUTES):
        routes.append("fft")
    impl = {"spectral": frac_spectral, "pv": frac_pv_field,
            "riesz": frac_via_riesz_composition, "fft": frac_fft_oracle}
    vals = {r: impl[r](g, alpha, u) for r in routes}
    region = comparison_region(u.lattice, fraction)
    disc = {}
    for i, a in enumerate(routes):
        for b in routes[i + 1:]:
            disc[(a, b)] = relative_l2(vals[a].values[region], vals[b].values[region])
    return FracReport(alpha, vals, disc, tolerance, region,
                      {"lattice": {"spacing": list(u.lattice.spacing),
                                   "extent": list(u.lattice.extent)},
                       "group": g.to_dict(), "near_cells": NEAR})
