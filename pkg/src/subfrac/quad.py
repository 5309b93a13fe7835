"""Small quadrature helpers shared by the kernel modules."""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss


@lru_cache(maxsize=64)
def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0):
    """Nodes and weights of the n-point Gauss-Legendre rule on [a, b]."""
    x, w = leggauss(n)
    half = 0.5 * (b - a)
    x = a + half * (x + 1.0)
    w = w * half
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=256)
def composite_gauss(panels: int, a: float = -1.0, b: float = 1.0, q: int = 16):
    """Composite q-point Gauss-Legendre rule with ``panels`` equal panels on [a, b]."""
    x, w = leggauss(q)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    xs = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    ws = (half[:, None] * w[None, :]).ravel()
    xs.setflags(write=False)
    ws.setflags(write=False)
    return xs, ws


def tensor_gauss(lo, hi, q: int):
    """Tensor Gauss rule on the box [lo, hi]; returns (points (N, d), weights (N,))."""
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    axes, wts = [], []
    for a, b in zip(lo, hi):
        x, w = gauss_legendre(q, float(a), float(b))
        axes.append(x)
        wts.append(w)
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, lo.size)
    w = wts[0]
    for extra in wts[1:]:
        w = np.multiply.outer(w, extra)
    return pts, w.ravel()


def cell_offsets(q: int, ndim: int):
    """Gauss points and weights for the unit cell [-1/2, 1/2]^ndim."""
    return tensor_gauss([-0.5] * ndim, [0.5] * ndim, q)
