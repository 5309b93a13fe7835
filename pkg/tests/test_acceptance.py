"""Acceptance criteria, one test each.

Every test prints a single ``CRITERION n: PASS|FAIL`` line with the measured
values, the tolerance and the runtime, then asserts the same condition.
"""
import math
import time

import numpy as np
import pytest

from subfrac import group as G
from subfrac.extension import (even_reflect, lift_poisson, lift_spectral, neumann_trace, residual_norm,
                               staggered_ygrid)
from subfrac.fractional import comparison_region, cross_validate, relative_l2
from subfrac.harnack import HarnackConfig, dilation_stress, refinement_study
from subfrac.heat import (HeatProvider, cell_average, h1_table, heat_convolve, heat_eval,
                          heat_kernel_cells)
from subfrac.kernels import riesz_convolution_rule, riesz_eval, riesz_tilde_eval
from subfrac.special import params_from_a, phi, phi_prime_at_zero
from subfrac.spectral import assemble_sublaplacian, eigendecompose

from .test_kernels import local_sublaplacian, loglog_slope, shell_points

H = G.heisenberg1()
E1, E3 = G.euclidean(1), G.euclidean(3)


@pytest.fixture
def report(capsys):
    """Print one verdict line outside pytest's capture and return it."""
    t0 = time.perf_counter()

    def emit(n, ok, detail, budget):
        dt = time.perf_counter() - t0
        ok = ok and dt <= budget
        with capsys.disabled():
            print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}  "
                  f"[runtime {dt:.1f} s, budget {budget:.0f} s]")
        return ok

    return emit


def test_criterion_1_constant_consistency(report):
    a = np.linspace(-0.99, 0.99, 101)[1:-1]
    worst = max(abs(params_from_a(x).C_a_from_profile - params_from_a(x).C_a) for x in a)
    ok = report(1, worst <= 1e-12, f"max |C_a(profile) - C_a(gamma)| = {worst:.2e} over {a.size} values (tol 1e-12)", 1)
    assert ok


def test_criterion_2_profile(report):
    p0 = {a: params_from_a(a) for a in (-0.5, 0.0, 0.5)}
    at_zero = max(abs(phi(p, 1e-14) - 1.0) for p in p0.values())
    p = p0[0.5]
    d = 1e-3
    ode = 0.0
    for t in (0.5, 1.0, 2.0):
        f = phi(p, np.array([t - d, t, t + d]))
        ode = max(ode, abs(-t ** p.alpha * (f[0] - 2 * f[1] + f[2]) / d ** 2 + f[1]))
    t = np.linspace(0, 10, 1001)
    collapse = np.abs(phi(p0[0.0], t) - np.exp(-t)).max()
    # phi ~ c sqrt(pi k / 2) t^(alpha/4) exp(-t^k / k): the exponent of t is alpha/4
    drift, literal = 0.0, 0.0
    for a in (-0.5, -0.25, 0.25, 0.5):
        q = params_from_a(a)
        r = lambda s, e: phi(q, s) * s ** (-e) * math.exp(s ** q.k / q.k)
        drift = max(drift, abs(r(20.0, q.alpha / 4) / r(10.0, q.alpha / 4) - 1))
        literal = max(literal, abs(r(20.0, q.alpha / 2) / r(10.0, q.alpha / 2) - 1))
    ok = at_zero <= 1e-8 and ode <= 1e-6 and collapse <= 1e-8 and drift <= 0.01
    ok = report(2, ok, f"phi(0)-1 = {at_zero:.1e} (1e-8); ODE residual {ode:.1e} (1e-6); "
                       f"a=0 collapse {collapse:.1e} (1e-8); decay ratio drift 10->20 {drift:.2%} (1%) "
                       f"[with exponent alpha/2 instead: {literal:.1%}]", 5)
    assert ok


def test_criterion_3_heat(report):
    PE, PH = HeatProvider(E1), HeatProvider(H)
    # mass
    lat = G.Lattice.box([0.1], [100])
    mass_e = heat_kernel_cells(PE, 1.0, lat, extent=(100,)).sum()
    r, z = np.linspace(0, 11, 441), np.linspace(0, 42, 1681)
    R, Z = np.meshgrid(r, z, indexing="ij")
    mass_h = np.trapezoid(np.trapezoid(h1_table(R, Z) * 4 * np.pi * R, z, axis=1), r)
    mass = max(abs(mass_e - 1), abs(mass_h - 1))
    # semigroup
    lat = G.Lattice.box([0.05], [300])
    pts = lat.points()
    v = heat_convolve(PE, 0.5, G.GridFunction(lat, heat_eval(PE, 0.5, pts))).values
    w = heat_eval(PE, 1.0, pts)
    semi_e = np.abs(v - w).sum() / np.abs(w).sum()
    lat = G.Lattice.box([0.2, 0.2, 0.25], [14, 14, 24])
    pts = lat.points()
    v = heat_convolve(PH, 0.5, G.GridFunction(lat, heat_eval(PH, 0.5, pts))).values
    w = heat_eval(PH, 1.0, pts)
    semi_h = np.abs(v - w).sum() / np.abs(w).sum()
    # scaling and semicheck
    probes = np.random.default_rng(0).normal(size=(20, 3))
    scale = 0.0
    for lam in (0.5, 2.0, 3.0):
        for g, P, q in ((E1, PE, probes[:, :1]), (H, PH, probes)):
            lhs = lam ** g.Q * heat_eval(P, lam ** 2 * 0.7, G.dilate(g, lam, q))
            scale = max(scale, np.abs(lhs / heat_eval(P, 0.7, q) - 1).max())
    check = max(np.abs(heat_eval(PH, 0.7, G.semicheck(H, probes)) / heat_eval(PH, 0.7, probes) - 1).max(),
                np.abs(heat_eval(PE, 0.7, -probes[:, :1]) / heat_eval(PE, 0.7, probes[:, :1]) - 1).max())
    # Monte Carlo, 10^5 paths, cell averages on cubes of side 0.4
    mp = np.array([[1.0, 0, 0], [0, 0, 0], [0, 0, 1.0], [0.5, 0.5, 0.5], [0, 1.0, -1.0]])
    mc = heat_eval(HeatProvider(H, "monte_carlo", seed=3, paths=100_000), 1.0, mp)
    zscore = np.abs(mc.value - cell_average(PH, 1.0, mp - 0.2, mp + 0.2)) / mc.stderr
    ok = mass <= 0.01 and max(semi_e, semi_h) <= 0.02 and scale <= 0.01 and check <= 1e-9 and zscore.max() <= 3
    ok = report(3, ok, f"mass defect {mass:.1e} (1%); semigroup L1 euclidean {semi_e:.2e}, heisenberg {semi_h:.2%} "
                       f"(2%); scaling {scale:.1e} (1%); semicheck {check:.1e}; MC max |z| {zscore.max():.2f} (3)", 300)
    assert ok


def test_criterion_4_riesz(report):
    newton = abs(riesz_eval(E3, 2.0, [[1.0, 0, 0]])[0] * 4 * math.pi - 1)
    p = np.array([0.4, -0.3, 0.5])
    exps = True
    for g in (E3, H):
        for beta in (0.8, 1.2, 2.0):
            exps &= round(loglog_slope(g, lambda q: riesz_eval(g, beta, q), p), 2) == round(beta - g.Q, 2)
        for alpha in (0.5, 1.0, 1.5):
            exps &= round(loglog_slope(g, lambda q: riesz_tilde_eval(g, alpha, q), p), 2) == round(-alpha - g.Q, 2)
    conv_e = riesz_convolution_rule(E3, 1.0, 1.0, G.Lattice.box([0.1] * 3, [20] * 3))["relative_l1"]
    conv_h = riesz_convolution_rule(H, 1.0, 1.5, G.Lattice.box([0.15] * 3, [20] * 3))["relative_l1"]
    harm = 0.0
    for g in (E3, H):
        pts = shell_points(g, 30, 1.0, 1.5)
        fn = lambda q: riesz_eval(g, 2.0, q, fast=True)
        LR = local_sublaplacian(g, fn, pts, 0.04)
        harm = max(harm, np.abs(LR).max() / (fn(pts) / G.gauge(g, pts) ** 2).max())
    ok = newton <= 5e-3 and exps and max(conv_e, conv_h) <= 0.05 and harm <= 0.05
    ok = report(4, ok, f"R_2 on euclidean3 at 1 vs 1/(4 pi) {newton:.1e} (0.5%); exponents to 2 dp: {exps}; "
                       f"convolution rule L1 euclidean3 {conv_e:.2%}, heisenberg1 {conv_h:.2%} (5%); "
                       f"shell |L R_2| / (R_2 / r^2) {harm:.2%} (5%)", 120)
    assert ok


def test_criterion_5_routes(report):
    lat = G.Lattice.box([0.05], [400])
    u = G.GridFunction.sample(lat, lambda x: np.exp(-x[..., 0] ** 2))
    rep = cross_validate(E1, 1.0, u, tolerance=0.03)
    worst_e = max(v for k, v in rep.discrepancies.items() if "fft" not in k)
    lat = G.Lattice.box([0.15, 0.15, 0.3], [20, 20, 20])
    u = G.GridFunction.sample(lat, lambda x: np.exp(-(x[..., 0] ** 2 + x[..., 1] ** 2) - 0.5 * x[..., 2] ** 2)
                              * (1 + 0.2 * x[..., 1]))
    worst_h = {al: cross_validate(H, al, u, tolerance=0.07).max_discrepancy for al in (0.5, 1.0, 1.5)}
    ok = worst_e <= 0.03 and max(worst_h.values()) <= 0.07
    hs = ", ".join(f"alpha={k}: {v:.2%}" for k, v in worst_h.items())
    ok = report(5, ok, f"euclidean1 worst pairwise {worst_e:.2%} (3%); heisenberg1 41^3 {hs} (7%)", 300)
    assert ok


def test_criterion_6_subordination(report):
    ys = [0.25, 0.5, 1.0]
    worst = {}
    lat = G.Lattice.box([0.05], [400])
    u = G.GridFunction.sample(lat, lambda x: np.exp(-x[..., 0] ** 2))
    S = eigendecompose(assemble_sublaplacian(E1, lat))
    m = comparison_region(lat)
    for a in (-0.4, 0.0, 0.4):
        vs, vp = lift_spectral(S, a, u, ys), lift_poisson(E1, a, u, ys)
        worst[f"euclidean1 a={a}"] = max(relative_l2(vs.values[k][m], vp.values[k][m]) for k in range(3))
    lat = G.Lattice.box([0.15, 0.15, 0.3], [20, 20, 20])
    u = G.GridFunction.sample(lat, lambda x: np.exp(-(x[..., 0] ** 2 + x[..., 1] ** 2) - 0.5 * x[..., 2] ** 2))
    m = comparison_region(lat)
    op = assemble_sublaplacian(H, lat)
    for a in (0.4,):
        vs, vp = lift_spectral(op, a, u, ys), lift_poisson(H, a, u, ys)
        worst[f"heisenberg1 a={a}"] = max(relative_l2(vs.values[k][m], vp.values[k][m]) for k in range(3))
    ok = max(worst.values()) <= 0.05
    ok = report(6, ok, "; ".join(f"{k}: {v:.2%}" for k, v in worst.items()) + " (5%)", 120)
    assert ok


def test_criterion_7_extension(report):
    orders = {}
    for a in (-0.4, 0.4):
        res = []
        for h in (0.2, 0.1, 0.05):
            lat = G.Lattice.box([h], [int(round(8 / h))])
            u = G.GridFunction.sample(lat, lambda x: np.exp(-x[..., 0] ** 2))
            op = assemble_sublaplacian(E1, lat)
            v = lift_spectral(eigendecompose(op), a, u, staggered_ygrid(h, 1.5))
            res.append(residual_norm(E1, even_reflect(v), 0.25, op)[0])
        orders[a] = np.log2(np.array(res[:-1]) / np.array(res[1:])).min()
    trace = 0.0
    for g, lat in ((E1, G.Lattice.box([0.05], [200])), (H, G.Lattice.box([0.3] * 3, [6] * 3))):
        S = eigendecompose(assemble_sublaplacian(g, lat))
        for a in (-0.4, 0.0, 0.4):
            p = params_from_a(a)
            for k in (0, 3, 10):
                e = S.operator.extend(S.eigenvectors[:, k])
                tr = neumann_trace(lift_spectral(S, a, e, [0.0, 5e-3, 1e-2]), [1e-2, 5e-3])
                want = (1 - a) ** a * phi_prime_at_zero(p) * S.eigenvalues[k] ** p.s * e.values
                trace = max(trace, relative_l2(tr.derivative_limit, want))
    ok = min(orders.values()) >= 1.0 and trace <= 0.02
    os_ = ", ".join(f"a={k}: {v:.2f}" for k, v in orders.items())
    ok = report(7, ok, f"residual order {os_} (>= 1); trace on eigenvectors worst {trace:.2e} (2%)", 180)
    assert ok


def test_criterion_8_harnack(report):
    cfg = HarnackConfig(H)
    ref = refinement_study(cfg, 2, 50, seed=0)
    dil = dilation_stress(cfg, (1.0, 2.0), instances=10, seed=0)
    finite = all(np.isfinite(i["max_quotient"]) for s in ("coarse", "fine") for i in ref[s]["instances"])
    ok = (ref["max_principle_ok"] and finite and ref["max_quotient_change"] <= 0.2
          and dil["max_drift"] <= 0.15)
    ok = report(8, ok, f"max principle {ref['max_principle_ok']}; quotients finite {finite}; "
                       f"max quotient {ref['coarse']['max_quotient']:.2f} -> {ref['fine']['max_quotient']:.2f}, "
                       f"change {ref['max_quotient_change']:.1%} (20%); dilation drift {dil['max_drift']:.1e} (15%)",
                600)
    assert ok
