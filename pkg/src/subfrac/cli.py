"""Command-line front end: ``subfrac <command> ...``.

Fields and kernels are written as CSV, reports as JSON with sorted keys so
that identical inputs produce identical bytes.  Every subcommand accepts
``--config path.json``; keys in that file (flag names with dashes or
underscores) override the command-line values.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import group as G
from .special import params_from_a


# ---------------------------------------------------------------------------
# parsing helpers


def parse_group(text: str) -> G.GroupSpec:
    """JSON spec, or the shorthands ``heisenberg1``, ``euclidean<n>``, ``product(<spec>)``."""
    text = text.strip()
    if text.startswith("{"):
        return G.from_json(text)
    if text == "heisenberg1":
        return G.heisenberg1()
    if text.startswith("euclidean"):
        return G.euclidean(int(text[len("euclidean"):] or 1))
    if text.startswith("product(") and text.endswith(")"):
        return G.product(parse_group(text[len("product("):-1]))
    raise argparse.ArgumentTypeError(f"cannot parse group {text!r}")


def _group_arg(text):
    try:
        return parse_group(text)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def parse_ygrid(text: str) -> np.ndarray:
    """``start:stop:step`` (inclusive) or a comma list."""
    if ":" in text:
        lo, hi, step = (float(t) for t in text.split(":"))
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return lo + step * np.arange(n)
    return np.array([float(t) for t in text.split(",")])


def parse_omega(text: str) -> float:
    """``ball:R`` (gauge ball of radius R about the identity)."""
    kind, _, val = text.partition(":")
    if kind != "ball" or not val:
        raise argparse.ArgumentTypeError("omega must look like ball:R")
    return float(val)


def read_csv(path: str) -> np.ndarray:
    """Numeric CSV; a first line that is not numeric is treated as a header."""
    with open(path) as fh:
        first = fh.readline()
    try:
        [float(t) for t in first.split(",")]
        skip = 0
    except ValueError:
        skip = 1
    return np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2))


def write_csv(path, header, rows) -> None:
    rows = np.atleast_2d(rows)
    out = sys.stdout if path in (None, "-") else open(path, "w")
    try:
        out.write(",".join(header) + "\n")
        for r in rows:
            out.write(",".join(repr(float(v)) for v in r) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()


def grid_from_rows(g: G.GroupSpec, rows: np.ndarray):
    """Rebuild (Lattice, GridFunction) from rows ``coords..., value`` on a full tensor grid."""
    if rows.shape[1] != g.dim + 1:
        raise ValueError(f"expected {g.dim} coordinate columns and one value column")
    coords = rows[:, :g.dim]
    spacing, extent, origin = [], [], []
    for k in range(g.dim):
        ax = np.unique(coords[:, k])
        if ax.size % 2 == 0 or ax.size < 3:
            raise ValueError("each axis needs an odd number (>= 3) of distinct values")
        h = np.diff(ax)
        if not np.allclose(h, h[0], rtol=1e-9, atol=1e-12):
            raise ValueError("grid spacing must be uniform")
        spacing.append(h[0])
        extent.append(ax.size // 2)
        origin.append(ax[ax.size // 2])
    lat = G.Lattice.box(spacing, extent, origin)
    if rows.shape[0] != lat.size:
        raise ValueError("input does not cover the full tensor grid")
    vals = np.empty(lat.shape)
    idx = np.rint((coords - np.asarray(origin)) / np.asarray(spacing)).astype(int) + np.asarray(extent)
    vals[tuple(idx.T)] = rows[:, -1]
    return lat, G.GridFunction(lat, vals)


def _coords_header(g):
    return [f"x{k + 1}" for k in range(g.dim)]


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, sort_keys=True, indent=1, default=_json_default)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, G.GroupSpec):
        return o.to_dict()
    raise TypeError(f"not serialisable: {type(o)}")


def apply_config(args: argparse.Namespace) -> argparse.Namespace:
    """Override parsed flags with the keys of ``--config``."""
    if not getattr(args, "config", None):
        return args
    with open(args.config) as fh:
        cfg = json.load(fh)
    for key, val in cfg.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise SystemExit(f"unknown config key {key!r}")
        if dest == "group":
            val = G.from_dict(val) if isinstance(val, dict) else parse_group(str(val))
        setattr(args, dest, val)
    return args


def resolve_alpha(args) -> float:
    """Order alpha of L^(alpha/2) from exactly one of --alpha / --a (alpha = 1 - a)."""
    alpha, a = getattr(args, "alpha", None), getattr(args, "a", None)
    if (alpha is None) == (a is None):
        raise SystemExit("give exactly one of --alpha and --a")
    if a is not None:
        params_from_a(a)
        alpha = 1.0 - a
    if not 0 < alpha < 2:
        raise SystemExit("alpha must lie in (0, 2)")
    return float(alpha)


# ---------------------------------------------------------------------------
# commands


def cmd_group_info(args) -> int:
    dump_json(args.group.describe(), args.out)
    return 0


def cmd_heat(args) -> int:
    from .heat import HeatProvider, MCEstimate, heat_eval
    g = args.group
    pts = read_csv(args.points)
    if pts.shape[1] != g.dim:
        raise SystemExit(f"points need {g.dim} columns")
    prov = HeatProvider(g, "monte_carlo" if args.mc else "auto", seed=args.seed, paths=args.paths)
    res = heat_eval(prov, args.t, pts)
    if isinstance(res, MCEstimate):
        write_csv(args.out, _coords_header(g) + ["h", "stderr"],
                  np.column_stack([pts, res.value, res.stderr]))
    else:
        write_csv(args.out, _coords_header(g) + ["h"], np.column_stack([pts, res]))
    return 0


def cmd_kernel(args) -> int:
    from .kernels import poisson_eval, riesz_eval, riesz_tilde_eval
    g = args.group
    pts = read_csv(args.points)
    if pts.shape[1] != g.dim:
        raise SystemExit(f"points need {g.dim} columns")
    if args.family == "riesz":
        vals = riesz_eval(g, args.param, pts)
    elif args.family == "rtilde":
        vals = riesz_tilde_eval(g, args.param, pts)
    else:
        vals = poisson_eval(g, args.param, pts, args.y)
    write_csv(args.out, _coords_header(g) + [args.family], np.column_stack([pts, vals]))
    return 0


def cmd_frac(args) -> int:
    from .fractional import (cross_validate, frac_pv_field, frac_spectral,
                             frac_via_riesz_composition)
    g = args.group
    alpha = resolve_alpha(args)
    lat, u = grid_from_rows(g, read_csv(args.input))
    routes = {"spectral": frac_spectral, "pv": frac_pv_field, "riesz": frac_via_riesz_composition}
    if args.route == "all":
        rep = cross_validate(g, alpha, u, tolerance=args.tolerance)
        names = sorted(rep.routes)
        fields = [rep.routes[n].values for n in names]
        if args.report:
            dump_json(rep.to_dict(), args.report)
    else:
        names = [args.route]
        fields = [routes[args.route](g, alpha, u).values]
    pts = lat.points().reshape(-1, g.dim)
    cols = [np.asarray(f).reshape(-1) for f in fields]
    write_csv(args.out, _coords_header(g) + names, np.column_stack([pts] + cols))
    return 0


def cmd_extend(args) -> int:
    from .extension import lift_poisson, lift_spectral
    from .spectral import assemble_sublaplacian, eigendecompose
    g = args.group
    params_from_a(args.a)
    lat, u = grid_from_rows(g, read_csv(args.input))
    y = parse_ygrid(args.ygrid)
    if args.method == "poisson":
        v = lift_poisson(g, args.a, u, y)
    else:
        op = assemble_sublaplacian(g, lat)
        S = eigendecompose(op) if op.size <= 3000 else op
        v = lift_spectral(S, args.a, u, y)
    pts = lat.points().reshape(-1, g.dim)
    rows = [np.column_stack([pts, np.full(pts.shape[0], yk), v.values[k].reshape(-1)])
            for k, yk in enumerate(v.ygrid)]
    write_csv(args.out, _coords_header(g) + ["y", "v"], np.vstack(rows))
    return 0


def cmd_harnack(args) -> int:
    from .harnack import HarnackConfig, campaign, dilation_stress, refinement_study
    cfg = HarnackConfig(args.group, alpha=args.alpha, spacing=args.spacing,
                        omega_radius=args.omega, truncation=args.truncation, b=args.b)
    if args.refine:
        rep = refinement_study(cfg, 2, args.instances, args.seed)
    else:
        rep = campaign(cfg, args.instances, args.seed).to_dict()
    if args.dilate:
        lams = [1.0] + [float(t) for t in args.dilate.split(",")]
        rep = {"campaign": rep, "dilation": dilation_stress(cfg, lams, args.instances, args.seed)}
    dump_json(rep, args.out)
    return 0


# ---------------------------------------------------------------------------
# verification suites


class Checks:
    def __init__(self):
        self.items = []

    def add(self, name, value, tol, passed=None):
        value = float(value)
        ok = (value <= tol) if passed is None else bool(passed)
        self.items.append({"name": name, "value": value, "tolerance": float(tol), "passed": ok})

    @property
    def ok(self):
        return all(c["passed"] for c in self.items)


def _suite_group(ck: Checks, groups):
    rng = np.random.default_rng(0)
    for g in groups:
        tag = g.to_json()
        p, q, r = rng.normal(size=(3, 64, g.dim))
        ck.add(f"{tag} associativity", np.abs(G.mult(g, p, G.mult(g, q, r)) - G.mult(g, G.mult(g, p, q), r)).max(), 1e-12)
        ck.add(f"{tag} inverse", np.abs(G.mult(g, p, G.inverse(g, p))).max(), 1e-12)
        ck.add(f"{tag} dilation automorphism",
               np.abs(G.dilate(g, 1.7, G.mult(g, p, q)) - G.mult(g, G.dilate(g, 1.7, p), G.dilate(g, 1.7, q))).max(), 1e-11)
        ck.add(f"{tag} semicheck automorphism",
               np.abs(G.semicheck(g, G.mult(g, p, q)) - G.mult(g, G.semicheck(g, p), G.semicheck(g, q))).max(), 1e-12)
        ck.add(f"{tag} gauge homogeneity",
               np.abs(G.gauge(g, G.dilate(g, 3.0, p)) - 3.0 * G.gauge(g, p)).max(), 1e-11)
        Qsum = sum((i + 1) * m for i, m in enumerate(g.layer_dims))
        ck.add(f"{tag} homogeneous dimension", abs(Qsum - g.Q), 0)
        # brackets of the frame on polynomials are exact for centred differences
        lat = G.Lattice.box([0.25] * g.dim, [4] * g.dim)
        worst = 0.0
        for i in range(g.m):
            for j in range(g.m):
                for k in range(g.dim):
                    f = G.GridFunction.sample(lat, lambda x, k=k: x[..., k])
                    XiXj = G.apply_field(g, i, G.apply_field(g, j, f)).values
                    XjXi = G.apply_field(g, j, G.apply_field(g, i, f)).values
                    want = g.bracket[k, g.horizontal[i], g.horizontal[j]]
                    diff = np.nan_to_num(XiXj - XjXi - want, nan=0.0)
                    worst = max(worst, np.abs(diff).max())
        ck.add(f"{tag} frame brackets match structure constants", worst, 1e-9)
    h = G.heisenberg1()
    ck.add("heisenberg1 (1,0,0)(0,1,0) = (1,1,-2)",
           np.abs(G.mult(h, [1, 0, 0], [0, 1, 0]) - [1, 1, -2]).max(), 0)
    ck.add("heisenberg1 dilate 2 (1,1,1) = (2,2,4)", np.abs(G.dilate(h, 2, [1, 1, 1]) - [2, 2, 4]).max(), 0)
    ck.add("heisenberg1 semicheck (1,2,3) = (-1,-2,3)", np.abs(G.semicheck(h, [1, 2, 3]) - [-1, -2, 3]).max(), 0)


def _suite_kernels(ck: Checks, groups):
    from .kernels import (poisson_eval, poisson_euclid_closed, poisson_h1_lambda, riesz_eval,
                          riesz_euclid_closed, riesz_h1_lambda, riesz_tilde_eval)
    e3, e1, h = G.euclidean(3), G.euclidean(1), G.heisenberg1()
    v = riesz_eval(e3, 2.0, np.array([[1.0, 0, 0]]))[0]
    ck.add("euclidean3 R_2 at |p|=1 vs 1/(4 pi)", abs(v * 4 * np.pi - 1), 5e-3)
    v = riesz_tilde_eval(e1, 1.0, np.array([[1.0]]))[0]
    ck.add("euclidean1 rtilde(1) vs 1/(2 pi)", abs(v * 2 * np.pi - 1), 1e-6)
    v = poisson_eval(e1, 0.0, np.array([[0.0]]), 1.0)[0]
    ck.add("euclidean1 Poisson(0,1) vs 1/pi", abs(v * np.pi - 1), 1e-6)
    pts = np.array([[0.3, 0.4, 0.2], [1.0, 0.0, 0.5], [0.2, -0.7, -1.1]])
    ck.add("heisenberg1 R_1.5 quadrature vs lambda form",
           np.max(np.abs(riesz_eval(h, 1.5, pts) / riesz_h1_lambda(1.5, pts) - 1)), 1e-6)
    ck.add("heisenberg1 Poisson a=0.3 quadrature vs lambda form",
           np.max(np.abs(poisson_eval(h, 0.3, pts, 0.7) / poisson_h1_lambda(0.3, pts, 0.7) - 1)), 1e-6)
    x = np.array([[0.5, 0.2, -0.3]])
    ck.add("euclidean3 R_1.3 vs closed form",
           abs(riesz_eval(e3, 1.3, x)[0] / riesz_euclid_closed(3, 1.3, x)[0] - 1), 1e-6)
    ck.add("euclidean3 Poisson a=-0.4 vs closed form",
           abs(poisson_eval(e3, -0.4, x, 0.6)[0] / poisson_euclid_closed(3, -0.4, x, 0.6)[0] - 1), 1e-6)
    for g in groups:
        p = np.array([[0.4] * g.dim])
        lam = 1.9
        r1 = riesz_eval(g, 1.2, G.dilate(g, lam, p))[0]
        r0 = riesz_eval(g, 1.2, p)[0]
        ck.add(f"{g.to_json()} R_1.2 homogeneity degree", abs(math.log(r1 / r0) / math.log(lam) - (1.2 - g.Q)), 1e-6)


def _suite_fractional(ck: Checks, groups):
    from .fractional import cross_validate
    for g in groups:
        if g.kind == "euclidean" and g.dim == 1:
            lat = G.Lattice.box([0.05], [400])
            u = G.GridFunction.sample(lat, lambda x: np.exp(-x[..., 0] ** 2))
            rep = cross_validate(g, 1.0, u, tolerance=0.03)
        elif g.kind == "heisenberg1":
            lat = G.Lattice.box([0.2, 0.2, 0.4], [12, 12, 12])
            u = G.GridFunction.sample(lat, lambda x: np.exp(-(x[..., 0] ** 2 + x[..., 1] ** 2) - 0.5 * x[..., 2] ** 2))
            rep = cross_validate(g, 1.0, u, tolerance=0.07)
        else:
            continue
        for (ra, rb), val in sorted(rep.discrepancies.items()):
            ck.add(f"{g.to_json()} alpha=1 {ra} vs {rb}", val, rep.tolerance)


def _suite_extension(ck: Checks, groups):
    from .extension import lift_poisson, lift_spectral, neumann_trace
    from .fractional import comparison_region, relative_l2
    from .spectral import assemble_sublaplacian, eigendecompose
    from .special import phi_prime_at_zero
    for g in groups:
        if g.kind == "euclidean" and g.dim == 1:
            lat = G.Lattice.box([0.05], [200])
        elif g.kind == "heisenberg1":
            lat = G.Lattice.box([0.3, 0.3, 0.3], [6, 6, 6])
        else:
            continue
        S = eigendecompose(assemble_sublaplacian(g, lat))
        for a in (-0.4, 0.0, 0.4):
            p = params_from_a(a)
            e = S.operator.extend(S.eigenvectors[:, 3])
            eps = np.array([1e-2, 5e-3])
            v = lift_spectral(S, a, e, np.array([0.0, 5e-3, 1e-2]))
            tr = neumann_trace(v, eps)
            want = (1 - a) ** a * phi_prime_at_zero(p) * S.eigenvalues[3] ** p.s * e.values
            ck.add(f"{g.to_json()} a={a} trace on eigenvector", relative_l2(tr.derivative_limit, want), 0.02)
        if g.dim == 1:
            u = G.GridFunction.sample(lat, lambda x: np.exp(-x[..., 0] ** 2))
            ys = np.array([0.25, 0.5, 1.0])
            vs = lift_spectral(S, 0.4, u, ys)
            vp = lift_poisson(g, 0.4, u, ys)
            m = comparison_region(lat)
            worst = max(relative_l2(vs.values[k][m], vp.values[k][m]) for k in range(3))
            ck.add(f"{g.to_json()} a=0.4 subordination identity", worst, 0.05)


def _suite_harnack(ck: Checks, groups):
    from .harnack import HarnackConfig, build_system, campaign, solve_dirichlet
    for g in groups:
        if g.kind == "heisenberg1":
            cfg = HarnackConfig(g)
        elif g.kind == "euclidean" and g.dim <= 2:
            cfg = HarnackConfig(g, spacing=0.125)
        else:
            continue
        sys_ = build_system(cfg)
        ones = np.ones(sys_.n_omega)
        ck.add(f"{g.to_json()} constants annihilated",
               np.abs(sys_.apply_full(ones, np.ones(sys_.W_oc.shape[1]))).max(), 1e-9)
        u = solve_dirichlet(sys_, np.full(sys_.W_oc.shape[1], 2.0))
        ck.add(f"{g.to_json()} constant data reproduced", np.abs(u - 2.0).max(), 1e-10)
        res = campaign(cfg, 5, seed=0)
        ck.add(f"{g.to_json()} maximum principle", 0.0 if res.max_principle_ok else 1.0, 0.0)
        ck.add(f"{g.to_json()} positive interior", 0.0 if res.min_interior > 0 else 1.0, 0.0)
        ck.add(f"{g.to_json()} max quotient finite", res.max_quotient, 1e6)


SUITES = {
    "group": (_suite_group, [G.euclidean(2), G.heisenberg1(), G.product(G.heisenberg1())]),
    "kernels": (_suite_kernels, [G.euclidean(3), G.heisenberg1()]),
    "fractional": (_suite_fractional, [G.euclidean(1), G.heisenberg1()]),
    "extension": (_suite_extension, [G.euclidean(1), G.heisenberg1()]),
    "harnack": (_suite_harnack, [G.heisenberg1()]),
}


def run_verify(suite: str, group: G.GroupSpec | None = None) -> tuple:
    """Run one suite (or ``all``); returns (exit code, report dict)."""
    names = list(SUITES) if suite == "all" else [suite]
    if any(n not in SUITES for n in names):
        raise ValueError(f"unknown suite {suite!r}")
    report = {"suite": suite, "group": None if group is None else group.to_dict(), "checks": {}}
    ok = True
    for n in names:
        fn, default = SUITES[n]
        ck = Checks()
        fn(ck, default if group is None else [group])
        report["checks"][n] = ck.items
        ok &= ck.ok
    report["passed"] = ok
    return (0 if ok else 1), report


def cmd_verify(args) -> int:
    code, report = run_verify(args.suite, args.group)
    dump_json(report, args.out)
    return code


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file whose keys override the flags")
    common.add_argument("--out", default="-", help="output path (default stdout)")

    p = argparse.ArgumentParser(prog="subfrac", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("group-info", parents=[common], help="describe a group as JSON")
    s.add_argument("--group", type=_group_arg, default=G.heisenberg1(),
                   help='JSON like {"kind":"heisenberg1"} or a shorthand (heisenberg1, euclidean3)')
    s.set_defaults(func=cmd_group_info)

    s = sub.add_parser("heat", parents=[common], help="heat kernel at points (CSV)")
    s.add_argument("--group", type=_group_arg, required=True, help="group spec")
    s.add_argument("--t", type=float, required=True, help="time t > 0")
    s.add_argument("--points", required=True, help="CSV of coordinates, one point per row")
    s.add_argument("--mc", action="store_true", help="Monte Carlo cell averages with standard errors")
    s.add_argument("--paths", type=int, default=100_000, help="Monte Carlo paths")
    s.add_argument("--seed", type=int, default=0, help="Monte Carlo seed")
    s.set_defaults(func=cmd_heat)

    s = sub.add_parser("kernel", parents=[common], help="Riesz, rtilde or Poisson kernel at points")
    s.add_argument("--family", choices=["riesz", "rtilde", "poisson"], required=True)
    s.add_argument("--group", type=_group_arg, required=True, help="group spec")
    s.add_argument("--param", type=float, required=True,
                   help="beta for riesz, alpha for rtilde, a for poisson")
    s.add_argument("--y", type=float, default=1.0, help="extension variable (poisson only)")
    s.add_argument("--points", required=True, help="CSV of coordinates")
    s.set_defaults(func=cmd_kernel)

    s = sub.add_parser("frac", parents=[common], help="apply L^(alpha/2) to a grid function")
    s.add_argument("--group", type=_group_arg, required=True, help="group spec")
    s.add_argument("--alpha", type=float, help="order alpha in (0, 2)")
    s.add_argument("--a", type=float, help="weight exponent a in (-1, 1); alpha = 1 - a")
    s.add_argument("--route", choices=["spectral", "pv", "riesz", "all"], default="all")
    s.add_argument("--in", dest="input", required=True, help="CSV rows coords..., u on a full grid")
    s.add_argument("--tolerance", type=float, default=0.07, help="pairwise tolerance for --route all")
    s.add_argument("--report", help="JSON path for the cross-validation report (--route all)")
    s.set_defaults(func=cmd_frac)

    s = sub.add_parser("extend", parents=[common], help="lift u to G x [0, Y]")
    s.add_argument("--group", type=_group_arg, required=True, help="group spec")
    s.add_argument("--a", type=float, required=True, help="weight exponent a in (-1, 1)")
    s.add_argument("--in", dest="input", required=True, help="CSV rows coords..., u on a full grid")
    s.add_argument("--ygrid", default="0:1:0.25", help="start:stop:step or comma list")
    s.add_argument("--method", choices=["spectral", "poisson"], default="spectral")
    s.set_defaults(func=cmd_extend)

    s = sub.add_parser("harnack", parents=[common], help="randomised Harnack campaign (JSON)")
    s.add_argument("--group", type=_group_arg, default=G.heisenberg1(), help="group spec")
    s.add_argument("--alpha", type=float, default=1.0, help="order alpha in (0, 2)")
    s.add_argument("--omega", type=parse_omega, default=1.25, help="ball:R")
    s.add_argument("--b", type=float, default=2.0, help="ball enlargement factor")
    s.add_argument("--spacing", type=float, default=0.25, help="lattice spacing")
    s.add_argument("--truncation", type=float, default=0.75, help="kernel truncation radius")
    s.add_argument("--instances", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--refine", action="store_true", help="also run at half the spacing")
    s.add_argument("--dilate", help="comma list of dilation factors for the stress test")
    s.set_defaults(func=cmd_harnack)

    s = sub.add_parser("verify", parents=[common], help="run invariant suites (JSON report)")
    s.add_argument("--suite", choices=["group", "kernels", "fractional", "extension", "harnack", "all"],
                   required=True)
    s.add_argument("--group", type=_group_arg, default=None, help="restrict suites to one group")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = apply_config(parser.parse_args(argv))
    t0 = time.perf_counter()
    code = args.func(args)
    print(f"subfrac {args.command}: {time.perf_counter() - t0:.1f} s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
