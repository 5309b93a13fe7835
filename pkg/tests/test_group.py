import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from subfrac import group as G

H = G.heisenberg1()
GROUPS = [G.euclidean(1), G.euclidean(2), G.euclidean(3), H, G.product(H)]
coord = st.floats(-3, 3, allow_nan=False)


def pts(dim):
    return arrays(float, (dim,), elements=coord)


# --- structure -------------------------------------------------------------

@pytest.mark.parametrize("g", GROUPS, ids=lambda g: g.to_json())
def test_structure_invariants(g):
    assert g.Q == sum((i + 1) * m for i, m in enumerate(g.layer_dims))
    # product groups append their extra horizontal axis last
    base_d = g.d[:-1] if g.kind == "product" else g.d
    assert np.all(np.diff(base_d) >= 0) and g.d.max() == g.step
    assert sorted(g.d.tolist())[:g.layer_dims[0]] == [1] * g.layer_dims[0]
    assert np.all(g.d[list(g.horizontal)] == 1)
    assert np.allclose(g.bracket, -np.swapaxes(g.bracket, 1, 2))
    assert G.from_json(g.to_json()) == g


def test_heisenberg_dimensions():
    assert (H.Q, H.step, H.m, H.dim) == (4, 2, 2, 3)
    assert G.product(H).Q == 5


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        G.from_dict({"kind": "engel"})


# --- group law -------------------------------------------------------------

def test_euclidean_product():
    assert np.array_equal(G.mult(G.euclidean(2), [1, 2], [3, 4]), [4, 6])


def test_heisenberg_product_value():
    assert np.array_equal(G.mult(H, [1, 0, 0], [0, 1, 0]), [1, 1, -2])


def test_heisenberg_inverse():
    p = np.array([1.0, 2.0, 3.0])
    assert np.array_equal(G.inverse(H, p), [-1, -2, -3])
    assert np.allclose(G.mult(H, p, G.inverse(H, p)), 0)


def test_identity_and_inverse_of_identity():
    e = np.zeros(3)
    p = np.array([0.3, -1.2, 2.0])
    assert np.array_equal(G.mult(H, p, e), p)
    assert np.array_equal(G.inverse(H, e), e)


def test_dimension_mismatch():
    with pytest.raises(G.DimensionError):
        G.mult(H, [1, 2], [1, 2, 3])


@pytest.mark.parametrize("g", GROUPS, ids=lambda g: g.to_json())
def test_associativity_random_triples(g):
    rng = np.random.default_rng(1)
    p, q, r = rng.normal(scale=2, size=(3, 200, g.dim))
    lhs = G.mult(g, p, G.mult(g, q, r))
    rhs = G.mult(g, G.mult(g, p, q), r)
    assert np.abs(lhs - rhs).max() <= 1e-12 * max(1, np.abs(lhs).max())


@settings(max_examples=60, deadline=None)
@given(pts(3), pts(3), st.floats(0.1, 5))
def test_dilation_and_semicheck_are_automorphisms(p, q, lam):
    lhs = G.dilate(H, lam, G.mult(H, p, q))
    rhs = G.mult(H, G.dilate(H, lam, p), G.dilate(H, lam, q))
    assert np.allclose(lhs, rhs, atol=1e-9)
    assert np.allclose(G.semicheck(H, G.mult(H, p, q)),
                       G.mult(H, G.semicheck(H, p), G.semicheck(H, q)))


def test_dilation_values():
    assert np.array_equal(G.dilate(H, 2, [1, 1, 1]), [2, 2, 4])
    assert np.array_equal(G.dilate(H, 1, [1, 2, 3]), [1, 2, 3])
    assert np.allclose(G.dilate(H, 2, G.dilate(H, 3, [1, 1, 1])), [6, 6, 36])
    with pytest.raises(ValueError):
        G.dilate(H, 0.0, [1, 1, 1])


def test_semicheck_values():
    assert np.array_equal(G.semicheck(H, [1, 2, 3]), [-1, -2, 3])
    assert np.array_equal(G.semicheck(H, G.semicheck(H, [1, 2, 3])), [1, 2, 3])
    assert np.array_equal(G.semicheck(G.euclidean(3), [1, 2, 3]), [-1, -2, -3])


def test_gauge_values():
    assert G.gauge(H, [1, 0, 0]) == pytest.approx(1)
    assert G.gauge(H, [0, 0, 1]) == pytest.approx(1)
    assert G.gauge(H, G.dilate(H, 3, [1, 0, 0])) == pytest.approx(3)
    assert G.gauge(H, [0, 0, 0]) == 0


@settings(max_examples=60, deadline=None)
@given(pts(3), st.floats(0.05, 20))
def test_gauge_homogeneous(p, lam):
    assert G.gauge(H, G.dilate(H, lam, p)) == pytest.approx(lam * G.gauge(H, p), rel=1e-10, abs=1e-12)


# --- fields and sub-Laplacian ---------------------------------------------

def _lat3(h=0.25, e=4):
    return G.Lattice.box([h] * 3, [e] * 3)


def test_field_values_on_z():
    lat = _lat3()
    f = G.GridFunction.sample(lat, lambda x: x[..., 2])
    X = G.apply_field(H, 0, f)
    Y = G.apply_field(H, 1, f)
    assert X.values[lat.index_of([0, 1, 0])] == pytest.approx(2)
    assert Y.values[lat.index_of([1, 0, 0])] == pytest.approx(-2)


def test_euclidean_field_and_laplacian():
    lat = G.Lattice.box([0.1, 0.1], [5, 5])
    f = G.GridFunction.sample(lat, lambda x: x[..., 0])
    v = G.apply_field(G.euclidean(2), 0, f).values
    assert np.allclose(v[np.isfinite(v)], 1)
    lat1 = G.Lattice.box([0.1], [10])
    q = G.GridFunction.sample(lat1, lambda x: x[..., 0] ** 2)
    Lq = G.sublaplacian_apply(G.euclidean(1), q).values
    assert np.allclose(Lq[np.isfinite(Lq)], -2)


def test_sublaplacian_of_z_and_constants_vanish():
    lat = _lat3()
    for fn in (lambda x: x[..., 2], lambda x: np.ones(x.shape[:-1])):
        v = G.sublaplacian_apply(H, G.GridFunction.sample(lat, fn)).values
        assert np.allclose(v[np.isfinite(v)], 0, atol=1e-10)


def test_boundary_ring_flagged():
    lat = _lat3()
    v = G.apply_field(H, 0, G.GridFunction.sample(lat, lambda x: x[..., 0])).values
    assert np.isnan(v[0]).all() and np.isfinite(v[1:-1, 1:-1, 1:-1]).all()


def test_lattice_too_small():
    lat = G.Lattice.box([0.1, 0.1, 0.1], [0, 3, 3])
    with pytest.raises(ValueError):
        G.apply_field(H, 0, G.GridFunction.sample(lat, lambda x: x[..., 0]))


def test_field_anticommutes_with_semicheck():
    lat = G.Lattice.box([0.05] * 3, [12] * 3)
    f = lambda x: np.exp(-(x[..., 0] - 0.1) ** 2 - 2 * x[..., 1] ** 2 - (x[..., 2] - 0.2) ** 2) * (1 + x[..., 0])
    fw = G.GridFunction.sample(lat, lambda x: f(G.semicheck(H, x)))
    for j in range(2):
        lhs = G.apply_field(H, j, fw).values
        Xf = G.apply_field(H, j, G.GridFunction.sample(lat, f)).values
        # evaluate Xf at semicheck(x): the lattice is symmetric, so flip x and y axes
        rhs = -Xf[::-1, ::-1, :]
        ok = np.isfinite(lhs) & np.isfinite(rhs)
        assert np.abs(lhs[ok] - rhs[ok]).max() < 1e-10


def test_sublaplacian_left_invariance():
    lat = G.Lattice.box([0.1] * 3, [10] * 3)
    f = lambda x: np.exp(-x[..., 0] ** 2 - x[..., 1] ** 2 - 0.5 * x[..., 2] ** 2)
    # translation by (0, 0, c) has no drift, so it maps nodes to nodes
    c = np.array([0.0, 0.0, 0.3])
    Lf = G.sublaplacian_apply(H, G.GridFunction.sample(lat, f)).values
    Lft = G.sublaplacian_apply(H, G.GridFunction.sample(lat, lambda x: f(G.mult(H, c, x)))).values
    shifted = np.roll(Lf, -3, axis=2)
    ok = np.isfinite(Lft) & np.isfinite(shifted)
    ok[:, :, -4:] = False
    assert np.abs(Lft[ok] - shifted[ok]).max() < 1e-12


def test_compact_stencil_matches_nested_on_quadratics():
    lat = _lat3(0.2, 5)
    f = G.GridFunction.sample(lat, lambda x: x[..., 0] ** 2 + x[..., 0] * x[..., 2] + x[..., 1] ** 2)
    a = G.sublaplacian_apply(H, f).values
    b = G.sublaplacian_compact(H, f).values
    ok = np.isfinite(a) & np.isfinite(b)
    assert np.allclose(a[ok], b[ok], atol=1e-9)


# --- CC distance -----------------------------------------------------------

def test_cc_distance_trivial_cases():
    lat = G.Lattice.box([1.0, 1.0], [5, 5])
    g = G.euclidean(2)
    assert G.cc_distance_estimate(g, lat, [0, 0], [0, 0]) == 0
    assert G.cc_distance_estimate(g, lat, [0, 0], [3, 4]) == pytest.approx(7)


def test_cc_distance_symmetric_under_semicheck():
    lat = G.Lattice.box([0.25, 0.25, 0.125], [8, 8, 16])
    graph = G.horizontal_graph(H, lat)
    p, q = [0.5, -0.25, 0.25], [-0.75, 0.5, -0.5]
    d = G.cc_distance_estimate(H, lat, p, q, graph)
    dw = G.cc_distance_estimate(H, lat, G.semicheck(H, p), G.semicheck(H, q), graph)
    assert np.isfinite(d) and d == pytest.approx(dw)


def test_cc_distance_off_lattice():
    with pytest.raises(ValueError):
        G.cc_distance_estimate(G.euclidean(2), G.Lattice.box([1, 1], [3, 3]), [0.5, 0], [1, 1])


def test_gauge_equivalence_constants_finite():
    lat = G.Lattice.box([0.25, 0.25, 0.125], [8, 8, 16])
    m, M = G.fit_gauge_equivalence(H, lat)
    assert 0 < m <= M < np.inf
    # vertical points stay within the fitted band
    d = G.cc_distances_from(H, lat, [0, 0, 0])
    z = d[lat.index_of([0, 0, 1.0])]
    assert m * 1.0 <= z <= M * 1.0
