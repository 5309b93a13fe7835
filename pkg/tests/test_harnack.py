import json
from dataclasses import replace

import numpy as np
import pytest

from subfrac import group as G
from subfrac.harnack import (DirichletSolver, HarnackConfig, admissible_balls, assemble_nonlocal,
                             build_system, campaign, dilation_stress, harnack_scan, probe_balls,
                             random_exterior_data, refinement_study, solve_dirichlet, thread_cap)
from subfrac.kernels import levy_kernel

H = G.heisenberg1()
E1 = G.euclidean(1)
LINE = HarnackConfig(E1, spacing=0.05)
SMALL_H = HarnackConfig(H, spacing=0.25, omega_radius=1.0, truncation=0.75, radii=(0.25,), min_nodes=1)


@pytest.fixture(scope="module")
def line_system():
    return build_system(LINE)


# --- assembly --------------------------------------------------------------

def test_rows_annihilate_constants(line_system):
    s = line_system
    ones_c = np.ones(int(s.collar.sum()))
    assert np.abs(s.apply_full(np.ones(s.n_omega), ones_c)).max() <= 1e-10


def test_weights_positive_symmetric_power_law(line_system):
    s = line_system
    W = s.W_oo.toarray()
    assert np.all(s.W_oo.data > 0) and np.all(s.W_oc.data > 0)
    assert np.allclose(W, W.T)
    x = s.lattice.points()[s.omega][:, 0]
    i, j = np.nonzero(W)
    ratio = W[i, j] * np.abs(x[i] - x[j]) ** (1 + s.alpha)
    assert np.allclose(ratio, ratio[0], rtol=1e-12)
    assert ratio[0] == pytest.approx(levy_kernel(E1, s.alpha, [[1.0]])[0] * 0.05, rel=1e-12)


def test_assembly_errors():
    lat = G.Lattice.box([0.1], [20])
    omega = np.abs(lat.points()[..., 0]) < 1
    with pytest.raises(ValueError):
        assemble_nonlocal(E1, lat, 2.0, 0.5, omega)
    with pytest.raises(ValueError):
        assemble_nonlocal(E1, lat, 1.0, 0.2, omega)
    with pytest.raises(ValueError):
        assemble_nonlocal(E1, lat, 1.0, 0.5, np.zeros(lat.shape, bool))
    with pytest.raises(ValueError):
        assemble_nonlocal(E1, lat, 1.0, 0.5, np.ones(lat.shape, bool))


def test_heisenberg_system_symmetric_and_tail():
    s = build_system(SMALL_H)
    A = s.matrix()
    assert np.allclose(A, A.T)
    assert np.all(np.linalg.eigvalsh(A) > 0)
    assert s.tail_mass > 0


# --- Dirichlet problem -----------------------------------------------------

def test_constant_data_gives_constant_solution(line_system):
    c = np.full(int(line_system.collar.sum()), 0.7)
    assert np.allclose(solve_dirichlet(line_system, c), 0.7, atol=1e-12)


def test_positivity_and_monotonicity(line_system):
    rng = np.random.default_rng(0)
    n = int(line_system.collar.sum())
    solver = DirichletSolver(line_system)
    g1 = rng.uniform(0, 1, n)
    g2 = g1 + rng.uniform(0, 0.5, n)
    u1, u2 = solver.solve(g1), solver.solve(g2)
    assert np.all(u1 > 0)
    assert np.all(u2 >= u1 - 1e-12)
    assert u1.max() <= g1.max() + 1e-12 and u1.min() >= g1.min() - 1e-12
    with pytest.raises(ValueError):
        solver.solve(-g1)


def test_solution_satisfies_equation(line_system):
    g = np.random.default_rng(1).uniform(0, 1, int(line_system.collar.sum()))
    u = solve_dirichlet(line_system, g)
    assert np.abs(line_system.apply_full(u, g)).max() <= 1e-9 * np.abs(line_system.W_oc @ g).max()


# --- scan ------------------------------------------------------------------

def test_constant_function_has_unit_quotients(line_system):
    s = line_system
    rep = harnack_scan(E1, s.lattice, s.omega, np.ones(s.n_omega), radii=(0.2, 0.4))
    assert rep.max_quotient == 1.0
    assert all(r.quotient == 1.0 for r in rep.records)
    json.loads(rep.to_json())


def test_nested_balls_have_larger_quotients(line_system):
    s = line_system
    x = s.lattice.points()[s.omega][:, 0]
    u = np.exp(x)
    rep = harnack_scan(E1, s.lattice, s.omega, u, radii=(0.1, 0.2, 0.3))
    by_centre = {}
    for r in rep.records:
        by_centre.setdefault(tuple(r.center), []).append((r.r, r.quotient))
    for recs in by_centre.values():
        q = [v for _, v in sorted(recs)]
        assert np.all(np.diff(q) >= 0)


def test_scan_errors(line_system):
    s = line_system
    with pytest.raises(ValueError):
        harnack_scan(E1, s.lattice, s.omega, np.ones(s.n_omega), radii=(5.0,))
    u = np.ones(s.n_omega)
    u[s.n_omega // 2] = 0.0
    with pytest.raises(ValueError):
        harnack_scan(E1, s.lattice, s.omega, u, radii=(0.2,))


def test_admissible_ball_containment():
    pts = np.linspace(-1, 1, 21)[:, None]
    inside = np.abs(pts[:, 0]) < 0.55
    balls = admissible_balls(E1, pts, inside, [0.2], b=2.0)
    for bl in balls:
        assert abs(bl.center[0]) + 0.4 <= 0.6 + 1e-12


def test_probe_spacing_must_divide():
    with pytest.raises(ValueError):
        probe_balls(replace(LINE, probe_spacing=0.27), build_system(LINE))


# --- campaign --------------------------------------------------------------

def test_campaign_reproducible_and_bounded():
    a = campaign(LINE, instances=6, seed=4)
    b = campaign(LINE, instances=6, seed=4, workers=3)
    qa = [r.max_quotient for r in a.reports]
    assert qa == [r.max_quotient for r in b.reports]
    assert a.max_principle_ok and a.min_interior > 0
    assert 1.0 < a.max_quotient < 100
    assert json.dumps(a.to_dict())


def test_exterior_data_nonnegative_and_deterministic(line_system):
    d1 = random_exterior_data(LINE, line_system, np.random.default_rng(5))
    d2 = random_exterior_data(LINE, line_system, np.random.default_rng(5))
    assert np.array_equal(d1, d2) and np.all(d1 >= 0) and d1.max() > 0


def test_dilation_is_exact_on_line():
    out = dilation_stress(LINE, (1.0, 2.0, 0.5), instances=4)
    assert out["lambdas"][1.0]["drift"] == 0.0
    assert out["max_drift"] <= 1e-9


def test_refinement_on_line():
    out = refinement_study(LINE, 2, instances=6)
    assert out["max_principle_ok"]
    assert out["max_quotient_change"] <= 0.1


@pytest.mark.slow
def test_heisenberg_campaign_and_dilation():
    res = campaign(SMALL_H, instances=4, seed=2)
    assert res.max_principle_ok and res.max_quotient >= 1.0
    out = dilation_stress(SMALL_H, (1.0, 2.0), instances=3)
    assert out["max_drift"] <= 1e-6


def test_thread_cap_env(monkeypatch):
    monkeypatch.setenv("SUBFRAC_THREADS", "3")
    assert thread_cap() == 3
    monkeypatch.setenv("SUBFRAC_THREADS", "x")
    assert thread_cap() == 1
