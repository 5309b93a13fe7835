"""Discrete nonlocal Dirichlet problems and Harnack quotients on gauge balls.

For nodes x in Omega the discrete operator is

    (A u)(x) = sum_y w(x, y) (u(x) - u(y)),   w(x, y) = K(x^-1 y) vol,

over lattice nodes y with h/2 < gauge(x^-1 y) <= R, where K is the kernel of
the singular-integral form of L^(alpha/2).  Since K is even, w is symmetric;
constants are annihilated by construction.  With u = g fixed off Omega the
system for u on Omega is a symmetric M-matrix, so the solution is a convex
combination of exterior values (discrete maximum principle).

The truncation at R drops the part of the operator coming from gauge > R;
its size is bounded by R^-alpha times the sphere mass of K over alpha times
the oscillation of g, which is reported.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import cho_factor, cho_solve

from .group import GroupSpec, Lattice, dilate, gauge, inverse, mult
from .fractional import sphere_mass
from .kernels import levy_kernel


@dataclass(frozen=True)
class HarnackConfig:
    group: GroupSpec
    alpha: float = 1.0
    spacing: float = 0.25
    omega_radius: float = 1.25
    truncation: float = 0.75
    b: float = 2.0
    radii: tuple = (0.35, 0.5, 0.6)
    probe_spacing: float = 0.25
    min_nodes: int = 5
    bumps: int = 4
    bump_width: float = 0.5

    def lattice(self) -> Lattice:
        g = self.group
        reach = self.omega_radius + self.truncation
        # gauge(x^-1 y) <= R with gauge(x) <= r0 keeps |y_h| <= r0 + R and
        # |y_v| <= r0^2 + R^2 + 2 r0 R on H^1 (bounded by reach^2 with slack)
        ext = []
        for k in range(g.dim):
            span = reach ** g.d[k] * (1.0 if g.d[k] == 1 else 1.5)
            ext.append(int(np.ceil(span / self.spacing)) + 1)
        return Lattice.box([self.spacing] * g.dim, ext)

    def to_dict(self):
        d = asdict(self)
        d["group"] = self.group.to_dict()
        d["radii"] = list(self.radii)
        return d


@dataclass(eq=False)
class NonlocalSystem:
    group: GroupSpec
    lattice: Lattice
    alpha: float
    truncation: float
    omega: np.ndarray            # mask over lattice nodes
    collar: np.ndarray           # exterior nodes coupled to Omega
    W_oo: sp.csr_matrix          # weights among Omega nodes
    W_oc: sp.csr_matrix          # weights Omega -> collar
    tail_mass: float             # int of K over gauge > R

    @property
    def n_omega(self) -> int:
        return int(self.omega.sum())

    def matrix(self) -> np.ndarray:
        """Dense A restricted to Omega: diag(row sums of all weights) - W_oo."""
        diag = np.asarray(self.W_oo.sum(axis=1)).ravel() + np.asarray(self.W_oc.sum(axis=1)).ravel()
        return np.diag(diag) - self.W_oo.toarray()

    def apply_full(self, u_omega, g_collar) -> np.ndarray:
        """(A u)(x) for x in Omega with u = g on the collar."""
        diag = np.asarray(self.W_oo.sum(axis=1)).ravel() + np.asarray(self.W_oc.sum(axis=1)).ravel()
        return diag * u_omega - self.W_oo @ u_omega - self.W_oc @ g_collar


def assemble_nonlocal(g: GroupSpec, lattice: Lattice, alpha: float, truncation: float,
                      omega: np.ndarray) -> NonlocalSystem:
    """Weights K(x^-1 y) vol for x in Omega and h/2 < gauge(x^-1 y) <= R."""
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    # horizontal spacing: the gauge size of the lattice, covariant under dilations
    hh = float(lattice.h[g.d == 1].max())
    if truncation < 3 * hh * (1 - 1e-12):
        raise ValueError("truncation radius must be at least 3 h")
    omega = np.asarray(omega, bool)
    if omega.shape != lattice.shape or not omega.any():
        raise ValueError("Omega must be a nonempty mask over the lattice")
    pts = lattice.points().reshape(-1, g.dim)
    oidx = np.flatnonzero(omega.ravel())
    vol = lattice.cell_volume
    rows, cols, vals = [], [], []
    for start in range(0, oidx.size, 64):
        blk = oidx[start:start + 64]
        xs = pts[blk]
        # candidates: bounding box of the truncation ball around each x
        lo = xs.min(axis=0)
        hi = xs.max(axis=0)
        # the vertical part of x^-1 y shifts by at most 2 |x_h| |w_h|
        xh = np.linalg.norm(xs[:, g.d == 1], axis=1).max()
        span = np.where(g.d == 1, truncation, truncation ** 2 + 2 * truncation * xh)
        cand = np.flatnonzero(np.all((pts >= lo - span - 1e-12) & (pts <= hi + span + 1e-12), axis=1))
        for i, x in zip(blk, xs):
            w = mult(g, inverse(g, x), pts[cand])
            r = gauge(g, w)
            sel = (r > 0.5 * hh) & (r <= truncation)
            rows.append(np.full(sel.sum(), i))
            cols.append(cand[sel])
            vals.append(levy_kernel(g, alpha, w[sel]) * vol)
    rows, cols, vals = map(np.concatenate, (rows, cols, vals))
    if rows.size == 0:
        raise ValueError("no neighbours within the truncation radius")
    n = lattice.size
    Wfull = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    in_omega = omega.ravel()
    used = np.zeros(n, bool)
    used[cols] = True
    collar = used & ~in_omega
    if not collar.any():
        raise ValueError("Omega is not coupled to any exterior node")
    cidx = np.flatnonzero(collar)
    W_oo = Wfull[oidx][:, oidx].tocsr()
    W_oc = Wfull[oidx][:, cidx].tocsr()
    tail = sphere_mass(g, alpha) * truncation ** (-alpha) / alpha
    return NonlocalSystem(g, lattice, alpha, truncation, omega, collar.reshape(lattice.shape),
                          W_oo, W_oc, tail)


class DirichletSolver:
    """Cholesky factorisation of the Omega block, reused over exterior data."""

    def __init__(self, system: NonlocalSystem):
        self.system = system
        A = system.matrix()
        try:
            self._chol = cho_factor(A)
        except np.linalg.LinAlgError as exc:
            raise RuntimeError("nonlocal Dirichlet matrix is singular") from exc

    def solve(self, g_collar: np.ndarray) -> np.ndarray:
        g_collar = np.asarray(g_collar, float)
        if np.any(g_collar < 0) or not np.all(np.isfinite(g_collar)):
            raise ValueError("exterior data must be finite and nonnegative")
        return cho_solve(self._chol, self.system.W_oc @ g_collar)


def solve_dirichlet(system: NonlocalSystem, g_collar) -> np.ndarray:
    """u on Omega (in mask order) with u = g on the collar."""
    return DirichletSolver(system).solve(g_collar)


# ---------------------------------------------------------------------------
# Harnack scan


@dataclass
class BallRecord:
    center: list
    r: float
    sup: float
    inf: float
    quotient: float
    nodes: int


@dataclass
class HarnackReport:
    records: list
    config: dict
    max_quotient: float
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"records": [asdict(r) for r in self.records], "config": self.config,
                "max_quotient": self.max_quotient, "metadata": self.metadata}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)


@dataclass(frozen=True)
class Ball:
    center: tuple
    r: float
    members: np.ndarray          # indices into the Omega node list


def admissible_balls(g: GroupSpec, points: np.ndarray, inside: np.ndarray, radii,
                     b: float = 2.0, min_nodes: int = 1) -> list:
    """Balls B(x, r) centred at inside points whose dilate B(x, b r) avoids every outside point.

    ``members`` index into ``points[inside]``; balls with fewer than
    ``min_nodes`` members are dropped.
    """
    points = np.asarray(points, float).reshape(-1, g.dim)
    inside = np.asarray(inside, bool).ravel()
    ins, outside = points[inside], points[~inside]
    balls = []
    for c in ins:
        ci = inverse(g, c)
        d_out = gauge(g, mult(g, ci, outside)).min() if outside.size else np.inf
        dist = gauge(g, mult(g, ci, ins))
        for r in radii:
            if d_out < b * r:
                continue
            members = np.flatnonzero(dist < r)
            if members.size >= min_nodes:
                balls.append(Ball(tuple(float(t) for t in c), float(r), members))
    if not balls:
        raise ValueError("no admissible balls")
    return balls


def harnack_scan(g: GroupSpec, lattice: Lattice, omega: np.ndarray, u_omega: np.ndarray,
                 radii=None, b: float = 2.0, config: dict | None = None,
                 balls: list | None = None, min_nodes: int = 1) -> HarnackReport:
    """sup/inf of u over B(x, r) for every node x and radius r with B(x, b r) inside Omega.

    Without precomputed ``balls`` the scan uses all lattice nodes, with
    containment checked on them.  Raises if no ball is admissible or u is
    not positive on one.
    """
    if balls is None:
        balls = admissible_balls(g, lattice.points(), omega, radii, b, min_nodes)
    u = np.asarray(u_omega, float)
    records = []
    for ball in balls:
        vals = u[ball.members]
        lo, hi = float(vals.min()), float(vals.max())
        if lo <= 0:
            raise ValueError("u must be positive on the scanned balls")
        records.append(BallRecord(list(ball.center), ball.r, hi, lo, hi / lo, int(vals.size)))
    return HarnackReport(records, config or {}, max(rec.quotient for rec in records))


# ---------------------------------------------------------------------------
# campaign


def probe_balls(cfg: HarnackConfig, system: NonlocalSystem, lam: float = 1.0) -> list:
    """Admissible balls on the probe grid, with members as indices into the Omega vector.

    Probe nodes are the lattice nodes on the grid of step probe_spacing
    (dilated by lam); the probe grid is shared by every lattice whose
    spacing divides it, so refinements scan identical point sets.
    """
    g = cfg.group
    lat = system.lattice
    step = cfg.probe_spacing * lam ** g.d
    ratio = step / lat.h
    if np.any(np.abs(ratio - np.rint(ratio)) > 1e-9):
        raise ValueError("probe spacing must be a multiple of the lattice spacing")
    pts = lat.points().reshape(-1, g.dim)
    on_grid = np.all(np.abs(pts / step - np.rint(pts / step)) < 1e-9, axis=1)
    in_omega = system.omega.ravel()
    number = np.cumsum(in_omega) - 1
    sel = np.flatnonzero(on_grid)
    inside = in_omega[sel]
    balls = admissible_balls(g, pts[sel], inside, [lam * r for r in cfg.radii], cfg.b,
                             cfg.min_nodes)
    to_omega = number[sel[inside]]
    return [Ball(bl.center, bl.r, to_omega[bl.members]) for bl in balls]


def build_system(cfg: HarnackConfig, lam: float = 1.0) -> NonlocalSystem:
    """Nonlocal system on Omega = gauge ball of radius lam * omega_radius."""
    g = cfg.group
    base = cfg.lattice()
    lat = base.rescaled(lam ** g.d) if lam != 1.0 else base
    omega = gauge(g, lat.points()) < lam * cfg.omega_radius - 1e-12
    return assemble_nonlocal(g, lat, cfg.alpha, lam * cfg.truncation, omega)


@dataclass
class CampaignResult:
    reports: list
    max_quotient: float
    max_principle_ok: bool
    min_interior: float
    tail_bound: float
    config: dict

    def to_dict(self):
        return {"max_quotient": self.max_quotient, "max_principle_ok": self.max_principle_ok,
                "min_interior": self.min_interior, "tail_bound": self.tail_bound,
                "config": self.config,
                "instances": [{"max_quotient": r.max_quotient, "balls": len(r.records)}
                              for r in self.reports]}


def thread_cap() -> int:
    """Worker count from SUBFRAC_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("SUBFRAC_THREADS", "1")))
    except ValueError:
        return 1


def campaign(cfg: HarnackConfig, instances: int = 50, seed: int = 0, lam: float = 1.0,
             workers: int | None = None) -> CampaignResult:
    """Solve ``instances`` Dirichlet problems with random bump data and scan each.

    Instance k draws from its own child of SeedSequence(seed), so results do
    not depend on the worker count; reports are kept in instance order.
    """
    g = cfg.group
    system = build_system(cfg, lam)
    solver = DirichletSolver(system)
    lat = system.lattice
    balls = probe_balls(cfg, system, lam)
    seeds = np.random.SeedSequence(seed).spawn(instances)

    def one(ss):
        # data drawn on the unscaled geometry, then composed with the dilation
        data = random_exterior_data(cfg, system, np.random.default_rng(ss), lam)
        u = solver.solve(data)
        lo, hi = data.min(), data.max()
        ok = bool(np.all(u >= lo - 1e-12 * hi) and np.all(u <= hi * (1 + 1e-12)))
        rep = harnack_scan(g, lat, system.omega, u, config=cfg.to_dict(), balls=balls)
        return rep, ok, float(u.min()), system.tail_mass * float(hi - lo)

    workers = thread_cap() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(ss) for ss in seeds]
    reports = [r[0] for r in results]
    return CampaignResult(reports, max(r.max_quotient for r in reports),
                          all(r[1] for r in results), min(r[2] for r in results),
                          max(r[3] for r in results), cfg.to_dict())


def random_bump_centres(cfg: HarnackConfig, rng) -> np.ndarray:
    """Bump centres uniform (in coordinates) on the collar gauge shell, off any lattice."""
    g = cfg.group
    r0, r1 = cfg.omega_radius, cfg.omega_radius + cfg.truncation
    half = np.where(g.d == 1, r1, r1 ** 2)
    out = []
    while len(out) < cfg.bumps:
        p = rng.uniform(-half, half)
        if r0 < gauge(g, p) <= r1:
            out.append(p)
    return np.array(out)


def random_exterior_data(cfg: HarnackConfig, system: NonlocalSystem, rng, lam: float = 1.0) -> np.ndarray:
    """Nonnegative gauge bumps on the collar, drawn on the unscaled geometry.

    The draw depends only on ``rng``, so the same data (composed with
    delta_(1/lam)) is seen by every lattice resolution and dilation.
    """
    g = cfg.group
    centres = random_bump_centres(cfg, rng)
    amps = rng.uniform(0.1, 1.0, size=cfg.bumps)
    pts0 = dilate(g, 1.0 / lam, system.lattice.points()[system.collar])
    out = np.zeros(pts0.shape[0])
    for c, a in zip(centres, amps):
        d = gauge(g, mult(g, inverse(g, c), pts0)) / cfg.bump_width
        out += a * np.exp(-d * d)
    return out


def dilation_stress(cfg: HarnackConfig, lambdas=(1.0, 2.0), instances: int = 10,
                    seed: int = 0) -> dict:
    """Rerun the campaign on delta_lambda-rescaled lattices and data; report quotient drift."""
    base = None
    out = {}
    for lam in lambdas:
        res = campaign(cfg, instances, seed, lam)
        q = np.array([r.max_quotient for r in res.reports])
        if base is None:
            base = q
        out[float(lam)] = {"max_quotient": float(q.max()),
                           "drift": float(np.max(np.abs(q / base - 1.0)))}
    return {"lambdas": out, "max_drift": max(v["drift"] for v in out.values())}


def refinement_study(cfg: HarnackConfig, factor: int = 2, instances: int = 50,
                     seed: int = 0) -> dict:
    """Campaign at the configured spacing and at spacing / factor on the same probe grid."""
    from dataclasses import replace
    coarse = campaign(cfg, instances, seed)
    fine = campaign(replace(cfg, spacing=cfg.spacing / factor), instances, seed)
    qc = np.array([r.max_quotient for r in coarse.reports])
    qf = np.array([r.max_quotient for r in fine.reports])
    return {"coarse": coarse.to_dict(), "fine": fine.to_dict(),
            "max_quotient_change": float(abs(fine.max_quotient / coarse.max_quotient - 1.0)),
            "instance_change": float(np.max(np.abs(qf / qc - 1.0))),
            "max_principle_ok": coarse.max_principle_ok and fine.max_principle_ok}
