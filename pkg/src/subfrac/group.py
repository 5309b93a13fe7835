"""Step-two Carnot groups in exponential coordinates.

A group is described by its homogeneity degrees, the indices of the
horizontal coordinates and a table of structure constants ``bracket[k, i, j]``
giving the second-layer component ``k`` of ``[e_i, e_j]``.  With this table
the Campbell-Hausdorff product truncates exactly::

    (p . q)_k = p_k + q_k + 1/2 * sum_ij bracket[k, i, j] p_i q_j

and the left-invariant horizontal fields are

    X_c = d_c + sum_k p_ck(x) d_k,   p_ck(x) = 1/2 * sum_i bracket[k, i, c] x_i.

The Heisenberg normalisation is X = d_x + 2y d_z, Y = d_y - 2x d_z, so that
[X, Y] = -4 d_z.  Every kernel constant in the package is relative to it.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra


class DimensionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GroupSpec:
    kind: str
    degrees: tuple
    horizontal: tuple
    bracket: np.ndarray = field(repr=False)
    base: "GroupSpec | None" = None

    def __post_init__(self):
        d = np.asarray(self.degrees)
        if self.kind != "product" and np.any(np.diff(d) < 0):
            raise ValueError("homogeneity degrees must be nondecreasing")
        if d.max() > 2:
            raise ValueError("only step <= 2 groups are supported")
        b = self.bracket
        if not np.allclose(b, -np.transpose(b, (0, 2, 1))):
            raise ValueError("structure constants must be antisymmetric")

    @property
    def dim(self) -> int:
        return len(self.degrees)

    @property
    def m(self) -> int:
        return len(self.horizontal)

    @property
    def step(self) -> int:
        return int(max(self.degrees))

    @property
    def Q(self) -> int:
        return int(sum(self.degrees))

    @property
    def layer_dims(self) -> tuple:
        d = np.asarray(self.degrees)
        return tuple(int(np.sum(d == i)) for i in range(1, self.step + 1))

    @property
    def d(self) -> np.ndarray:
        return np.asarray(self.degrees, dtype=float)

    @property
    def is_abelian(self) -> bool:
        return not np.any(self.bracket)

    def __eq__(self, other):
        return isinstance(other, GroupSpec) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(json.dumps(self.to_dict(), sort_keys=True))

    def to_dict(self) -> dict:
        if self.kind == "euclidean":
            return {"kind": "euclidean", "n": self.dim}
        if self.kind == "heisenberg1":
            return {"kind": "heisenberg1"}
        return {"kind": "product", "base": self.base.to_dict()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def describe(self) -> dict:
        return {
            **self.to_dict(),
            "dim": self.dim,
            "step": self.step,
            "Q": self.Q,
            "layer_dims": list(self.layer_dims),
            "degrees": list(self.degrees),
            "horizontal": list(self.horizontal),
        }


def euclidean(n: int) -> GroupSpec:
    if n < 1:
        raise ValueError("n must be positive")
    return GroupSpec("euclidean", (1,) * n, tuple(range(n)), np.zeros((n, n, n)))


def heisenberg1() -> GroupSpec:
    b = np.zeros((3, 3, 3))
    b[2, 0, 1] = -4.0
    b[2, 1, 0] = 4.0
    return GroupSpec("heisenberg1", (1, 1, 2), (0, 1), b)


def product(base: GroupSpec) -> GroupSpec:
    """``base x R``; the extra coordinate is appended last and is horizontal."""
    n = base.dim
    b = np.zeros((n + 1, n + 1, n + 1))
    b[:n, :n, :n] = base.bracket
    return GroupSpec(
        "product", tuple(base.degrees) + (1,), tuple(base.horizontal) + (n,), b, base
    )


def from_dict(spec: dict) -> GroupSpec:
    kind = spec.get("kind")
    if kind == "euclidean":
        return euclidean(int(spec["n"]))
    if kind == "heisenberg1":
        return heisenberg1()
    if kind == "product":
        return product(from_dict(spec["base"]))
    raise ValueError(f"unknown group kind {kind!r}")


def from_json(text: str) -> GroupSpec:
    return from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# group law


def _check(g: GroupSpec, *pts):
    out = []
    for p in pts:
        p = np.asarray(p, dtype=float)
        if p.shape[-1] != g.dim:
            raise DimensionError(f"expected {g.dim} coordinates, got {p.shape[-1]}")
        out.append(p)
    return out


def mult(g: GroupSpec, p, q) -> np.ndarray:
    """Group product of (broadcastable arrays of) points."""
    p, q = _check(g, p, q)
    corr = 0.5 * np.einsum("kij,...i,...j->...k", g.bracket, p, q)
    return p + q + corr


def inverse(g: GroupSpec, p) -> np.ndarray:
    (p,) = _check(g, p)
    return -p


def dilate(g: GroupSpec, lam: float, p) -> np.ndarray:
    if not lam > 0:
        raise ValueError("dilation factor must be positive")
    (p,) = _check(g, p)
    return p * lam ** g.d


def semicheck(g: GroupSpec, p) -> np.ndarray:
    (p,) = _check(g, p)
    return p * (-1.0) ** g.d


def gauge(g: GroupSpec, p) -> np.ndarray:
    """Korányi-type homogeneous norm ``(|x_h|^4 + |x_v|^2)^(1/4)``."""
    (p,) = _check(g, p)
    first = g.d == 1
    h2 = np.sum(p[..., first] ** 2, axis=-1)
    v2 = np.sum(p[..., ~first] ** 2, axis=-1)
    return (h2 * h2 + v2) ** 0.25


def field_coefficients(g: GroupSpec, c: int, pts) -> np.ndarray:
    """Coefficients of X_c at ``pts``: shape (..., dim); entry c equals 1."""
    (pts,) = _check(g, pts)
    coef = 0.5 * np.einsum("ki,...i->...k", g.bracket[:, :, c], pts)
    coef[..., c] = 1.0
    return coef


def field_matrix(g: GroupSpec, pts) -> np.ndarray:
    """Stacked horizontal frame, shape (..., m, dim)."""
    return np.stack([field_coefficients(g, c, pts) for c in g.horizontal], axis=-2)


# ---------------------------------------------------------------------------
# lattices and sampled functions


@dataclass(frozen=True, eq=False)
class Lattice:
    spacing: tuple
    extent: tuple
    origin: tuple = None

    def __post_init__(self):
        if self.origin is None:
            object.__setattr__(self, "origin", (0.0,) * len(self.spacing))
        if not (len(self.spacing) == len(self.extent) == len(self.origin)):
            raise DimensionError("spacing, extent and origin must have equal length")
        if any(h <= 0 for h in self.spacing):
            raise ValueError("spacing must be positive")
        if any(e < 0 for e in self.extent):
            raise ValueError("extent must be nonnegative")

    @classmethod
    def box(cls, spacing, extent, origin=None):
        return cls(tuple(float(h) for h in np.atleast_1d(spacing)),
                   tuple(int(e) for e in np.atleast_1d(extent)),
                   None if origin is None else tuple(float(o) for o in origin))

    @property
    def ndim(self) -> int:
        return len(self.spacing)

    @property
    def shape(self) -> tuple:
        return tuple(2 * e + 1 for e in self.extent)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def h(self) -> np.ndarray:
        return np.asarray(self.spacing)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axes(self) -> list:
        return [o + h * np.arange(-e, e + 1) for o, h, e in
                zip(self.origin, self.spacing, self.extent)]

    def points(self) -> np.ndarray:
        """Node coordinates, shape ``self.shape + (ndim,)``."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def index_of(self, p) -> tuple:
        p = np.asarray(p, dtype=float)
        k = (p - np.asarray(self.origin)) / self.h
        ki = np.rint(k)
        if not np.allclose(k, ki, atol=1e-9) or np.any(np.abs(ki) > np.asarray(self.extent)):
            raise ValueError(f"point {p} is not a lattice node")
        return tuple(int(i) + e for i, e in zip(ki, self.extent))

    def rescaled(self, factors) -> "Lattice":
        f = np.asarray(factors, dtype=float)
        return Lattice(tuple(self.h * f), self.extent, tuple(np.asarray(self.origin) * f))

    def interior_mask(self, rings: int = 1, axes=None) -> np.ndarray:
        mask = np.ones(self.shape, dtype=bool)
        for ax in range(self.ndim) if axes is None else axes:
            sl = [slice(None)] * self.ndim
            sl[ax] = slice(0, rings)
            mask[tuple(sl)] = False
            sl[ax] = slice(self.shape[ax] - rings, None)
            mask[tuple(sl)] = False
        return mask


@dataclass(eq=False)
class GridFunction:
    lattice: Lattice
    values: np.ndarray
    valid: np.ndarray = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.lattice.shape:
            raise DimensionError(
                f"values shape {self.values.shape} != lattice shape {self.lattice.shape}")
        if self.valid is None:
            self.valid = np.ones(self.lattice.shape, dtype=bool)

    @classmethod
    def sample(cls, lattice: Lattice, fn) -> "GridFunction":
        pts = lattice.points()
        return cls(lattice, fn(pts))

    def __add__(self, other):
        return GridFunction(self.lattice, self.values + other.values, self.valid & other.valid)

    def __sub__(self, other):
        return GridFunction(self.lattice, self.values - other.values, self.valid & other.valid)

    def __mul__(self, c):
        return GridFunction(self.lattice, self.values * c, self.valid.copy())

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


# ---------------------------------------------------------------------------
# horizontal differential operators


def _d1(v, ax, h):
    out = np.zeros_like(v)
    sl = [slice(None)] * v.ndim
    lo, mid, hi = list(sl), list(sl), list(sl)
    lo[ax], mid[ax], hi[ax] = slice(0, -2), slice(1, -1), slice(2, None)
    out[tuple(mid)] = (v[tuple(hi)] - v[tuple(lo)]) / (2 * h)
    return out


def apply_field(g: GroupSpec, j: int, f: GridFunction) -> GridFunction:
    """X_j f by centered differences (``j`` is 0-based over horizontal fields)."""
    lat = f.lattice
    if lat.ndim != g.dim:
        raise DimensionError("lattice dimension does not match group")
    c = g.horizontal[j]
    coef = field_coefficients(g, c, lat.points())
    involved = [k for k in range(g.dim) if k == c or np.any(coef[..., k] != 0)]
    if any(lat.extent[k] < 1 for k in involved):
        raise ValueError("lattice too small for a centered difference")
    out = np.zeros(lat.shape)
    for k in involved:
        out += coef[..., k] * _d1(f.values, k, lat.spacing[k])
    # a centred difference is valid only where both neighbours are valid
    valid = f.valid & lat.interior_mask(1, involved)
    for k in involved:
        sl_lo = [slice(None)] * g.dim
        sl_hi = [slice(None)] * g.dim
        sl_mid = [slice(None)] * g.dim
        sl_lo[k], sl_mid[k], sl_hi[k] = slice(0, -2), slice(1, -1), slice(2, None)
        valid[tuple(sl_mid)] &= f.valid[tuple(sl_lo)] & f.valid[tuple(sl_hi)]
    return GridFunction(lat, np.where(valid, out, np.nan), valid)


def sublaplacian_apply(g: GroupSpec, f: GridFunction) -> GridFunction:
    """-sum_j X_j X_j f with nested centered differences (two invalid rings)."""
    acc = None
    for j in range(g.m):
        xf = apply_field(g, j, f)
        xf = GridFunction(f.lattice, np.nan_to_num(xf.values), xf.valid)
        xxf = apply_field(g, j, xf)
        acc = xxf if acc is None else acc + xxf
    return GridFunction(f.lattice, -np.where(acc.valid, acc.values, np.nan), acc.valid)


def stencil_terms(g: GroupSpec, lattice: Lattice):
    """Compact second-order stencil of L = -sum X_c^2.

    Returns a list of ``(offset, weight_array)`` with weight arrays over the
    lattice nodes.  X_c^2 = d_c^2 + 2 sum_k p_ck d_c d_k + sum_kl p_ck p_cl d_k d_l
    because p_ck does not depend on x_c or on upper coordinates.
    """
    pts = lattice.points()
    h = lattice.h
    n = g.dim
    terms = {}

    def add(off, w):
        off = tuple(off)
        terms[off] = terms.get(off, 0.0) + w

    def second(i, j, w):
        if np.isscalar(w) and w == 0:
            return
        if i == j:
            e = np.zeros(n, int)
            e[i] = 1
            add(e, w / h[i] ** 2)
            add(-e, w / h[i] ** 2)
            add(np.zeros(n, int), -2 * w / h[i] ** 2)
        else:
            for si in (1, -1):
                for sj in (1, -1):
                    e = np.zeros(n, int)
                    e[i], e[j] = si, sj
                    add(e, si * sj * w / (4 * h[i] * h[j]))

    for c in g.horizontal:
        coef = field_coefficients(g, c, pts)
        upper = [k for k in range(n) if k != c and np.any(coef[..., k] != 0)]
        second(c, c, -1.0)
        for k in upper:
            second(c, k, -2.0 * coef[..., k])
        for k in upper:
            for l in upper:
                second(k, l, -coef[..., k] * coef[..., l])
    return [(off, np.broadcast_to(w, lattice.shape)) for off, w in terms.items()]


def shift(v: np.ndarray, off) -> np.ndarray:
    """``out[i] = v[i + off]`` with zero fill outside."""
    out = np.zeros_like(v)
    src, dst = [], []
    for o, s in zip(off, v.shape):
        if o >= 0:
            src.append(slice(o, s))
            dst.append(slice(0, s - o))
        else:
            src.append(slice(0, s + o))
            dst.append(slice(-o, s))
    out[tuple(dst)] = v[tuple(src)]
    return out


def sublaplacian_compact(g: GroupSpec, f: GridFunction) -> GridFunction:
    """L f with the compact stencil used for matrix assembly (one invalid ring)."""
    lat = f.lattice
    out = np.zeros(lat.shape)
    for off, w in stencil_terms(g, lat):
        out += w * shift(f.values, off)
    valid = f.valid & lat.interior_mask(1)
    return GridFunction(lat, np.where(valid, out, np.nan), valid)


# ---------------------------------------------------------------------------
# Carnot-Caratheodory distance on the lattice graph


def horizontal_graph(g: GroupSpec, lattice: Lattice) -> csr_matrix:
    """Graph of single horizontal steps of length h_c, drift rounded to nodes."""
    if lattice.ndim != g.dim:
        raise DimensionError("lattice dimension does not match group")
    shape = lattice.shape
    pts = lattice.points().reshape(-1, g.dim)
    idx = np.indices(shape).reshape(g.dim, -1).T
    ext = np.asarray(lattice.extent)
    h = lattice.h
    rows, cols, wts = [], [], []
    for c in g.horizontal:
        coef = field_coefficients(g, c, pts)
        for s in (1.0, -1.0):
            disp = s * h[c] * coef
            tgt = idx + np.rint(disp / h).astype(int)
            ok = np.all((tgt >= 0) & (tgt <= 2 * ext), axis=1)
            src = np.nonzero(ok)[0]
            dst = np.ravel_multi_index(tgt[ok].T, shape)
            rows.append(src)
            cols.append(dst)
            wts.append(np.full(src.size, h[c]))
    rows, cols, wts = map(np.concatenate, (rows, cols, wts))
    n = lattice.size
    return csr_matrix((wts, (rows, cols)), shape=(n, n))


def cc_distance_estimate(g: GroupSpec, lattice: Lattice, p, q, graph=None) -> float:
    i = np.ravel_multi_index(lattice.index_of(p), lattice.shape)
    j = np.ravel_multi_index(lattice.index_of(q), lattice.shape)
    graph = horizontal_graph(g, lattice) if graph is None else graph
    dist = dijkstra(graph, directed=False, indices=i)
    return float(dist[j])


def cc_distances_from(g: GroupSpec, lattice: Lattice, p, graph=None) -> np.ndarray:
    """Graph distances from node ``p`` to every node, shaped like the lattice."""
    i = np.ravel_multi_index(lattice.index_of(p), lattice.shape)
    graph = horizontal_graph(g, lattice) if graph is None else graph
    return dijkstra(graph, directed=False, indices=i).reshape(lattice.shape)


def fit_gauge_equivalence(g: GroupSpec, lattice: Lattice, p=None, rmin=None):
    """Fit constants m <= d/gauge <= M over reachable nodes away from ``p``."""
    p = np.asarray(lattice.origin) if p is None else np.asarray(p, float)
    dist = cc_distances_from(g, lattice, p)
    pts = lattice.points()
    gg = gauge(g, mult(g, inverse(g, p), pts))
    rmin = 2 * lattice.h.max() if rmin is None else rmin
    sel = np.isfinite(dist) & (gg > rmin)
    ratio = dist[sel] / gg[sel]
    return float(ratio.min()), float(ratio.max())
