"""Heat kernels of d/dt + L.

Abelian groups use the Gaussian (4 pi t)^(-n/2) exp(-|x|^2 / 4t).  On the
Heisenberg group with X = d_x + 2y d_z, Y = d_y - 2x d_z the kernel is

    h(t, x, y, z) = 1 / (32 pi^2 t^2) int_R (lam / sinh lam)
                    cos(lam z / 4t) exp(-r^2 lam coth(lam) / 4t) d lam,

r^2 = x^2 + y^2.  Its normalisation was fixed by requiring unit mass, the
scaling h(t, p) = t^-2 h(1, delta_(1/sqrt t) p) and agreement with the
Monte Carlo estimator below; the tests check all three.  The Fourier
transform in z is (4 pi t)^-1 (lam / sinh lam) exp(-r^2 lam coth lam / 4t)
with lam = 4 t xi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .conv import group_convolve, kernel_extent, scaled_kernel_cells
from .group import GridFunction, GroupSpec, dilate
from .quad import composite_gauss

H1_AT_ORIGIN = 1.0 / 64.0
_LAMBDA_CUT = 42.0
_TABLE_R = 11.0
_TABLE_Z = 42.0


# ---------------------------------------------------------------------------
# Heisenberg kernel at unit time


def _lam_coth(lam):
    out = np.ones_like(lam)
    nz = lam != 0
    out[nz] = lam[nz] / np.tanh(lam[nz])
    return out


def _lam_sinh(lam):
    out = np.ones_like(lam)
    nz = lam != 0
    out[nz] = lam[nz] / np.sinh(lam[nz])
    return out


def h1_unit(r, z) -> np.ndarray:
    """Heisenberg heat kernel at t = 1 as a function of (r, z), by quadrature."""
    r = np.abs(np.asarray(r, float))
    z = np.abs(np.asarray(z, float))
    r, z = np.broadcast_arrays(r, z)
    shape = r.shape
    r = r.ravel()
    z = z.ravel()
    out = np.empty(r.size)
    cut = _LAMBDA_CUT / (1.0 + 0.25 * r * r) + 2.0
    # nodes: resolve the decay scale of the envelope and the z-oscillation
    need = 160 + np.ceil(0.5 * cut * z).astype(int)
    sizes = np.array([256, 512, 1024, 2048, 4096, 8192])
    # past the largest rule z > 365, where the kernel is below exp(-pi z / 4) < 1e-120
    out[need > sizes[-1]] = 0.0
    bucket = np.searchsorted(sizes, need)
    for b in np.unique(bucket[need <= sizes[-1]]):
        sel = np.nonzero(bucket == b)[0]
        x, w = composite_gauss(int(sizes[b]) // 16, 0.0, 1.0)
        for c0 in range(0, sel.size, 4096):
            s = sel[c0:c0 + 4096]
            L = cut[s][:, None]
            lam = x[None, :] * L
            f = (_lam_sinh(lam) * np.cos(lam * z[s][:, None] / 4.0)
                 * np.exp(-0.25 * r[s][:, None] ** 2 * _lam_coth(lam)))
            out[s] = 2.0 * (f * L) @ w / (32.0 * np.pi ** 2)
    return out.reshape(shape)


def h1_fourier(r, xi, t=1.0) -> np.ndarray:
    """Fourier transform in z of the Heisenberg heat kernel at time t."""
    lam = 4.0 * t * np.asarray(xi, float)
    lam, r = np.broadcast_arrays(lam, np.asarray(r, float))
    return (_lam_sinh(np.abs(lam)) * np.exp(-r * r * _lam_coth(np.abs(lam)) / (4.0 * t))
            / (4.0 * np.pi * t))


@lru_cache(maxsize=1)
def _h1_table():
    # cosine transform of the envelope on one fixed set of nodes
    r = np.linspace(0.0, _TABLE_R, 221)
    z = np.linspace(0.0, _TABLE_Z, 841)
    lam, w = composite_gauss(256, 0.0, _LAMBDA_CUT + 2.0)
    env = _lam_sinh(lam)[None, :] * np.exp(-0.25 * r[:, None] ** 2 * _lam_coth(lam)[None, :])
    vals = (env * w) @ np.cos(0.25 * np.outer(lam, z)) * (2.0 / (32.0 * np.pi ** 2))
    return RectBivariateSpline(r, z, vals, kx=3, ky=3)


def h1_table(r, z) -> np.ndarray:
    """Interpolated unit-time Heisenberg kernel; zero outside the tabulated box."""
    r = np.abs(np.asarray(r, float))
    z = np.abs(np.asarray(z, float))
    r, z = np.broadcast_arrays(r, z)
    out = np.zeros(r.shape)
    inside = (r <= _TABLE_R) & (z <= _TABLE_Z)
    if np.any(inside):
        out[inside] = np.maximum(_h1_table().ev(r[inside], z[inside]), 0.0)
    return out


# ---------------------------------------------------------------------------
# providers


@dataclass(frozen=True)
class HeatProvider:
    """Which heat kernel to use for a group.

    kind is one of ``abelian``, ``heisenberg1_integral`` or ``monte_carlo``;
    ``auto`` picks the deterministic one compatible with the group.
    """

    group: GroupSpec
    kind: str = "auto"
    seed: int = 0
    paths: int = 100_000
    steps_per_unit: int = 200
    tabulated: bool = False

    def __post_init__(self):
        kind = self.kind
        if kind == "auto":
            kind = "abelian" if self.group.is_abelian else "heisenberg1_integral"
            object.__setattr__(self, "kind", kind)
        if kind not in ("abelian", "heisenberg1_integral", "monte_carlo"):
            raise ValueError(f"unknown heat provider kind {kind!r}")
        if kind == "abelian" and not self.group.is_abelian:
            raise ValueError("abelian provider needs an abelian group")
        if kind == "heisenberg1_integral" and _heis_base(self.group) is None:
            raise ValueError("integral provider needs heisenberg1 or a product over it")


def _heis_base(g: GroupSpec):
    """Number of extra abelian coordinates if ``g`` is H^1 x R^k, else None."""
    k = 0
    while g.kind == "product":
        g = g.base
        k += 1
    return k if g.kind == "heisenberg1" else None


def _euclid_heat(t, p):
    n = p.shape[-1]
    return (4 * np.pi * t) ** (-n / 2) * np.exp(-np.sum(p * p, axis=-1) / (4 * t))


def heat_unit_h1(p, tabulated=False) -> np.ndarray:
    p = np.asarray(p, float)
    r = np.hypot(p[..., 0], p[..., 1])
    return h1_table(r, p[..., 2]) if tabulated else h1_unit(r, p[..., 2])


class MCEstimate(NamedTuple):
    value: np.ndarray
    stderr: np.ndarray


def heat_eval(provider: HeatProvider, t: float, p, cell=None):
    """h(t, p) for points ``p`` of shape (..., dim).

    Monte Carlo providers return an :class:`MCEstimate` of the average
    density over the box ``p +- cell/2`` (``cell`` defaults to 0.4 per axis).
    """
    if not t > 0:
        raise ValueError("t must be positive")
    g = provider.group
    p = np.asarray(p, float)
    if p.shape[-1] != g.dim:
        raise ValueError("point dimension does not match group")
    if provider.kind == "abelian":
        return _euclid_heat(t, p)
    if provider.kind == "heisenberg1_integral":
        k = _heis_base(g)
        q = dilate(g, 1.0 / math.sqrt(t), p)
        val = heat_unit_h1(q[..., :3], provider.tabulated) / t ** 2
        if k:
            val = val * _euclid_heat(t, p[..., 3:])
        return val
    cell = np.full(g.dim, 0.4) if cell is None else np.broadcast_to(np.asarray(cell, float), (g.dim,))
    pts = p.reshape(-1, g.dim)
    est, se = mc_estimate(g, t, pts - 0.5 * cell, pts + 0.5 * cell,
                          seed=provider.seed, paths=provider.paths,
                          steps_per_unit=provider.steps_per_unit)
    return MCEstimate(est.reshape(p.shape[:-1]), se.reshape(p.shape[:-1]))


def cell_average(provider: HeatProvider, t: float, lo, hi, q: int = 8) -> np.ndarray:
    """Average of h(t, .) over boxes [lo, hi] (arrays of shape (N, dim))."""
    from .quad import cell_offsets
    lo = np.atleast_2d(np.asarray(lo, float))
    hi = np.atleast_2d(np.asarray(hi, float))
    u, w = cell_offsets(q, lo.shape[1])
    out = np.empty(lo.shape[0])
    for i, (a, b) in enumerate(zip(lo, hi)):
        pts = 0.5 * (a + b) + u * (b - a)
        out[i] = np.dot(heat_eval(provider, t, pts), w)
    return out


# ---------------------------------------------------------------------------
# Monte Carlo oracle


def simulate_paths(g: GroupSpec, t: float, paths: int, seed: int,
                   steps_per_unit: int = 200, chunk: int = 20_000) -> np.ndarray:
    """Endpoints of the diffusion generated by -L, started at the identity, at time t.

    Runs dX = sum_j X_j(X) o dW_j to time 2t (generator half the sum of
    squares).  Horizontal increments are exact; each upper coordinate gets
    the chord term plus a Gaussian with the variance of the Brownian-bridge
    Levy area, which keeps the scheme exact in its second moments.
    """
    if paths < 1:
        raise ValueError("need at least one path")
    T = 2.0 * t
    nsteps = max(int(math.ceil(steps_per_unit * t)), 1)
    dt = T / nsteps
    hor = np.asarray(g.horizontal)
    upper = np.nonzero(g.d > 1)[0]
    pairs = [(i, j) for a, i in enumerate(hor) for j in hor[a + 1:]
             if np.any(g.bracket[upper][:, i, j])]
    out = np.empty((paths, g.dim))
    seqs = np.random.SeedSequence(seed).spawn(int(math.ceil(paths / chunk)))
    for c, ss in enumerate(seqs):
        rng = np.random.default_rng(ss)
        n = min(chunk, paths - c * chunk)
        x = np.zeros((n, g.dim))
        for _ in range(nsteps):
            dw = rng.standard_normal((n, hor.size)) * math.sqrt(dt)
            if upper.size:
                dx = np.zeros((n, g.dim))
                dx[:, hor] = dw
                # chord: 1/2 sum B[k,i,c] x_i dW_c (the dW_i dW_c part cancels)
                x[:, upper] += 0.5 * np.einsum("kic,ni,nc->nk", g.bracket[upper], x, dx)
                for i, j in pairs:
                    area = rng.standard_normal(n) * (dt / math.sqrt(12.0))
                    x[:, upper] += np.outer(area, g.bracket[upper, i, j])
            x[:, hor] += dw
        out[c * chunk:c * chunk + n] = x
    return out


def mc_estimate(g: GroupSpec, t: float, lo, hi, seed: int = 0, paths: int = 100_000,
                steps_per_unit: int = 200):
    """Occupation densities of boxes [lo, hi] at time t, with standard errors."""
    if paths < 1:
        raise ValueError("zero paths")
    lo = np.atleast_2d(np.asarray(lo, float))
    hi = np.atleast_2d(np.asarray(hi, float))
    x = simulate_paths(g, t, paths, seed, steps_per_unit)
    vol = np.prod(hi - lo, axis=1)
    frac = np.array([np.mean(np.all((x >= a) & (x < b), axis=1)) for a, b in zip(lo, hi)])
    se = np.sqrt(frac * (1 - frac) / paths) / vol
    return frac / vol, se


# ---------------------------------------------------------------------------
# convolution


def heat_kernel_cells(provider: HeatProvider, t: float, lattice, extent=None) -> np.ndarray:
    """Cell integrals of h(t, .) over the centred offset lattice."""
    g = provider.group
    if provider.kind == "monte_carlo":
        raise ValueError("convolution needs a deterministic provider")
    extent = kernel_extent(g, lattice) if extent is None else extent
    if provider.kind == "abelian":
        return _gauss_cells(t, lattice, extent)
    fast = HeatProvider(g, provider.kind, tabulated=True)
    fn = lambda pts: heat_eval(fast, t, pts)
    return scaled_kernel_cells(g, lattice, extent, fn, math.sqrt(t))


def _gauss_cells(t, lattice, extent):
    from scipy.special import erf
    out = None
    s = math.sqrt(4 * t)
    for h, e in zip(lattice.spacing, extent):
        c = h * np.arange(-e, e + 1)
        w = 0.5 * (erf((c + h / 2) / s) - erf((c - h / 2) / s))
        out = w if out is None else np.multiply.outer(out, w)
    return out


def heat_convolve(provider: HeatProvider, t: float, u: GridFunction,
                  out_slices=None) -> GridFunction:
    """Discrete group convolution u * h(t, .) on the lattice of ``u``."""
    if not t > 0:
        raise ValueError("t must be positive")
    lat = u.lattice
    kc = heat_kernel_cells(provider, t, lat)
    vals = group_convolve(provider.group, lat, u.values, kc, out_slices)
    return GridFunction(lat, vals, np.isfinite(vals))
