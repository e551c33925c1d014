import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from simplex_projection.density import (
    DensityGrid,
    DirichletParams,
    SimplexDensity,
    analytic_marginal_values,
    dirichlet_density,
    dirichlet_marginal,
    dirichlet_pdf,
    dirichlet_validation_report,
    grid_from_json,
    grid_integral,
    grid_to_json,
    interpolate,
    interpolate_many,
    marginalize,
    recursive_marginalize,
    subdivision_nodes,
)
from simplex_projection.errors import (
    AccuracyTooLow,
    DepthOutOfRange,
    EmptyIndexSet,
    EvalFailure,
    FacetTooSmall,
    IndexAbsent,
    OutsideFacet,
)
from simplex_projection.geometry import BarycentricPoint, perspective_project

from .oracles import dirichlet_pdf_naive, lattice_nodes, line_integral_naive

DIR253 = DirichletParams((2, 5, 3))

# Literal segment sums produced by tests/oracles.py::line_integral_naive
FROZEN_LINE_INTEGRAL = {
    (1, 3, 20): [0.0, 0.0223323189835122, 0.2507404897743091, 0.8557036454495524, 1.7130927663677202,
                 2.3769545706932016, 2.256664407968782, 1.0942836301920977, 0.0],
    (2, 2, 11): [0.0, 3.1120400362163885, 2.657734536356516, 1.0373466787387962, 0.0],
}


def constant_grid(labels, facet, depth, c=1.0, mode="pushforward"):
    nodes = subdivision_nodes(len(labels), facet, depth)
    return DensityGrid(labels, facet, depth, nodes, np.full(len(nodes), c), mode)


def mixture_density():
    a, b = DirichletParams((2, 5, 3)), DirichletParams((4, 2, 1.5))

    def f(X):
        return 0.5 * np.exp(np.log(np.maximum(X, 1e-300)) @ (np.array(a.alpha) - 1) + a.log_norm) + \
            0.5 * np.exp(np.log(np.maximum(X, 1e-300)) @ (np.array(b.alpha) - 1) + b.log_norm)

    def exact(grid):
        return 0.5 * analytic_marginal_values(a, grid) + 0.5 * analytic_marginal_values(b, grid)

    return SimplexDensity(3, f), exact


# Dirichlet


def test_dirichlet_examples():
    assert dirichlet_pdf(DirichletParams((1, 1, 1)), BarycentricPoint((0.2, 0.3, 0.5))) == pytest.approx(2.0, rel=1e-14)
    assert dirichlet_pdf(DirichletParams((2, 2)), BarycentricPoint((0.5, 0.5))) == pytest.approx(1.5, rel=1e-14)
    c = BarycentricPoint((1 / 3,) * 3)
    expected = math.gamma(10) / (math.gamma(2) * math.gamma(5) * math.gamma(3)) * (1 / 3) ** 7
    assert dirichlet_pdf(DIR253, c) == pytest.approx(expected, rel=1e-13)


def test_dirichlet_matches_scipy(rng):
    for alpha in [(2, 5, 3), (0.7, 1.3, 2.2, 4.0), (30.0, 40.0, 55.0)]:
        params = DirichletParams(alpha)
        for x in rng.dirichlet(np.ones(len(alpha)), 20):
            x = x / x.sum()
            ref = stats.dirichlet.pdf(x, alpha)
            assert dirichlet_pdf(params, BarycentricPoint(tuple(x))) == pytest.approx(ref, rel=1e-10)
            assert dirichlet_pdf_naive(alpha, x) == pytest.approx(ref, rel=1e-10)


def test_large_concentration_does_not_overflow():
    params = DirichletParams((200.0, 300.0, 250.0))
    v = dirichlet_pdf(params, BarycentricPoint((0.27, 0.40, 0.33)))
    assert math.isfinite(v) and v > 0


def test_dirichlet_marginal_examples():
    assert dirichlet_marginal(DIR253, {1, 2}).alpha == (2.0, 5.0)
    assert dirichlet_marginal(DIR253, {2, 3}).alpha == (5.0, 3.0)
    assert dirichlet_marginal(DIR253, {1, 3}).alpha == (2.0, 3.0)
    with pytest.raises(EmptyIndexSet):
        dirichlet_marginal(DIR253, set())


# grid structure


def test_subdivision_nodes():
    assert subdivision_nodes(3, 1, 2)[:, 0].tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert len(subdivision_nodes(4, 2, 1)) == 6
    assert len(subdivision_nodes(3, 3, 10)) == 1025
    tri = subdivision_nodes(4, 1, 3)
    assert np.allclose(tri.sum(axis=1), 1.0)
    assert [tuple(r) for r in (tri * 8).round().astype(int)] == lattice_nodes(2, 8)
    for bad in (0, 15):
        with pytest.raises(DepthOutOfRange):
            subdivision_nodes(3, 1, bad)


@pytest.mark.parametrize("depth", [1, 3, 6])
def test_grid_integral_constants(depth):
    assert grid_integral(constant_grid((1, 2, 3), 2, depth, 3.0)) == pytest.approx(3.0, rel=1e-14)
    assert grid_integral(constant_grid((1, 2, 3, 4), 4, depth, 3.0)) == pytest.approx(1.5, rel=1e-14)


def test_grid_integral_exact_for_affine():
    # edge: int_0^1 (a + b y) dy;  triangle: int over {y1 + y2 <= 1} of a + b y1 + c y2
    nodes = subdivision_nodes(3, 1, 4)
    g = DensityGrid((1, 2, 3), 1, 4, nodes, 2.0 + 3.0 * nodes[:, 0], "line_integral")
    assert grid_integral(g) == pytest.approx(2.0 + 1.5, rel=1e-14)
    nodes = subdivision_nodes(4, 1, 4)
    g = DensityGrid((1, 2, 3, 4), 1, 4, nodes, 1.0 + 2.0 * nodes[:, 0] + 5.0 * nodes[:, 1], "line_integral")
    assert grid_integral(g) == pytest.approx(0.5 + 2.0 / 6 + 5.0 / 6, rel=1e-13)


# interpolation


def test_interpolate_at_nodes_and_midpoints():
    nodes = subdivision_nodes(3, 3, 3)
    vals = np.arange(len(nodes), dtype=float) ** 2
    g = DensityGrid((1, 2, 3), 3, 3, nodes, vals, "pushforward")
    for i, z in enumerate(nodes):
        assert interpolate(g, z) == vals[i]
    mids = (nodes[:-1] + nodes[1:]) / 2
    assert np.allclose(interpolate_many(g, mids), (vals[:-1] + vals[1:]) / 2, rtol=0, atol=1e-12)


def test_interpolate_accepts_projections():
    g = constant_grid((1, 2, 3, 4), 2, 3, 0.7)
    p = perspective_project(BarycentricPoint((0.1, 0.2, 0.3, 0.4)), 2)
    assert interpolate(g, p) == pytest.approx(0.7, abs=1e-15)


def test_interpolate_outside_facet():
    g = constant_grid((1, 2, 3, 4), 4, 2)
    with pytest.raises(OutsideFacet):
        interpolate(g, (-0.1, 0.6, 0.5))
    with pytest.raises(OutsideFacet):
        interpolate(g, (0.3, 0.3, 0.3))


@settings(max_examples=60, deadline=None)
@given(
    st.integers(1, 5),
    st.lists(st.floats(-5, 5), min_size=4, max_size=4),
    st.lists(st.floats(0, 1), min_size=3, max_size=3),
)
def test_interpolation_reproduces_affine_functions(depth, coef, raw):
    nodes = subdivision_nodes(4, 3, depth)
    f = lambda Y: coef[0] + Y @ np.array(coef[1:])  # noqa: E731
    vals = f(nodes)
    shift = -min(0.0, vals.min())  # grids are nonnegative; constants stay affine
    g = DensityGrid((1, 2, 3, 4), 3, depth, nodes, vals + shift, "line_integral")
    x = np.array(raw) + 1e-3
    x /= x.sum()
    assert interpolate(g, x) == pytest.approx(f(x) + shift, abs=1e-10)


def test_interpolation_on_tetrahedron_facet_of_pentachoron():
    nodes = subdivision_nodes(5, 5, 3)
    coef = np.array([0.3, 1.1, 2.0, 0.4])
    g = DensityGrid((1, 2, 3, 4, 5), 5, 3, nodes, nodes @ coef, "line_integral")
    rng = np.random.default_rng(4)
    X = rng.dirichlet(np.ones(4), 200)
    X /= X.sum(axis=1, keepdims=True)
    assert np.allclose(interpolate_many(g, X), X @ coef, atol=1e-12, rtol=0)


# marginalization


def test_line_integral_matches_frozen_reference():
    density = dirichlet_density(DIR253)
    for (facet, depth, M), expected in FROZEN_LINE_INTEGRAL.items():
        g = marginalize(density, facet, depth, M, mode="line_integral")
        assert np.allclose(g.values, expected, rtol=1e-12, atol=1e-14)


def test_line_integral_oracle_reproduces_frozen_reference():
    pdf = lambda x: dirichlet_pdf_naive((2, 5, 3), x) if min(x) > 0 else 0.0  # noqa: E731
    for (facet, depth, M), expected in FROZEN_LINE_INTEGRAL.items():
        assert line_integral_naive(pdf, 3, facet, depth, M) == pytest.approx(expected, rel=1e-12, abs=1e-14)


def test_line_integral_tends_to_segment_integral():
    g = marginalize(dirichlet_density(DIR253), 1, 2, 20000, mode="line_integral")
    for z, value in zip(g.nodes[1:-1], g.values[1:-1]):
        start = np.array([0.0, *z])
        length = np.linalg.norm(start - np.array([1.0, 0.0, 0.0])) / math.sqrt(2)
        vertex = np.array([1.0, 0.0, 0.0])
        ref, _ = integrate.quad(lambda s: stats.dirichlet.pdf((1 - s) * start + s * vertex, DIR253.alpha), 0, 1)
        assert value == pytest.approx(length * ref, rel=2e-3)


def test_pushforward_beta_example():
    g = marginalize(dirichlet_density(DIR253), 1, 10, 1000)
    mid = int(np.flatnonzero(np.isclose(g.nodes[:, 0], 0.5))[0])
    assert g.values[mid] == pytest.approx(105 * 0.5**6, abs=1e-6)
    assert g.values[mid] == pytest.approx(stats.beta.pdf(0.5, 5, 3), abs=1e-6)


def test_uniform_gives_flat_pushforward():
    density = dirichlet_density(DirichletParams((1, 1, 1)))
    for facet in (1, 2, 3):
        g = marginalize(density, facet, 6, 200)
        assert np.allclose(g.values, 1.0, atol=1e-12)


def test_m_doubling_change_is_small():
    density, _ = mixture_density()
    a = marginalize(density, 1, 10, 1000)
    b = marginalize(density, 1, 10, 2000)
    assert np.max(np.abs(a.values - b.values)) < 1e-4
    a = marginalize(dirichlet_density(DIR253), 1, 10, 1000)
    b = marginalize(dirichlet_density(DIR253), 1, 10, 2000)
    assert np.max(np.abs(a.values - b.values)) < 1e-4


def test_convergence_in_accuracy():
    # a Dirichlet factorizes along rays, so its normalized marginal hides M; a mixture does not
    density, exact = mixture_density()
    Ms = [125, 250, 500, 1000, 2000]
    grids = [marginalize(density, 1, 12, M) for M in Ms]
    interior = ~grids[0].boundary
    ref = exact(grids[0])[interior]
    errs = [np.max(np.abs(g.values[interior] - ref)) for g in grids]
    steps = [np.max(np.abs(b.values - a.values)) for a, b in zip(grids, grids[1:])]
    for big, small in zip(steps, steps[1:]):
        assert small < big / 3
    assert errs[-1] < errs[0] / 10
    floor = errs[-1]
    for e, nxt in zip(errs, errs[1:]):
        assert nxt <= e * 1.05 or nxt <= 2 * floor


def test_boundary_nodes_allowed_infinite():
    # alpha < 1 puts poles on the boundary; they are dropped, not extrapolated
    g = marginalize(dirichlet_density(DirichletParams((0.5, 2.0, 3.0))), 3, 6, 100)
    assert np.all(np.isfinite(g.values))
    assert grid_integral(g) == pytest.approx(1.0, abs=1e-12)


def test_eval_failures():
    nan_inside = SimplexDensity(3, lambda X: np.where(X[:, 0] > 0.3, np.nan, 1.0))
    with pytest.raises(EvalFailure):
        marginalize(nan_inside, 1, 3, 10)

    def boom(X):
        raise RuntimeError("no")

    with pytest.raises(EvalFailure):
        marginalize(SimplexDensity(3, boom), 1, 3, 10)


def test_serial_density_callable():
    calls = []

    def one(row):
        calls.append(1)
        return 1.0

    g = marginalize(SimplexDensity(3, one, vectorized=False), 2, 2, 5)
    assert len(calls) == 5 * 3
    assert np.allclose(g.values, 1.0)


def test_marginalize_argument_errors():
    d = dirichlet_density(DIR253)
    with pytest.raises(AccuracyTooLow):
        marginalize(d, 1, 3, 1)
    with pytest.raises(AccuracyTooLow):
        marginalize(d, 1, 3, 2, mode="pushforward")
    marginalize(d, 1, 3, 2, mode="line_integral")
    with pytest.raises(IndexAbsent):
        marginalize(d, 4, 3, 10)
    with pytest.raises(FacetTooSmall):
        marginalize(dirichlet_density(DirichletParams((2, 2))), 1, 3, 10)


# recursion


def test_recursive_constant_stays_constant():
    tri = constant_grid((1, 2, 3, 4), 4, 5, 2.0)
    for sub in (1, 2, 3):
        edge = recursive_marginalize(tri, sub, 5, 100)
        assert edge.labels == (1, 2, 3) and edge.facet == sub
        assert np.allclose(edge.values, 1.0, atol=1e-12)


def test_recursion_terminates_at_edges():
    params = DirichletParams((2, 3, 4, 5, 6))
    tet = marginalize(dirichlet_density(params), 5, 3, 40)
    tri = recursive_marginalize(tet, 4, 3, 40)
    edge = recursive_marginalize(tri, 3, 3, 40)
    assert (tet.facet_dim, tri.facet_dim, edge.facet_dim) == (3, 2, 1)
    assert edge.facet_labels == (1, 2)
    with pytest.raises(FacetTooSmall):
        recursive_marginalize(edge, 1, 3, 40)
    with pytest.raises(IndexAbsent):
        recursive_marginalize(tri, 4, 3, 40)


def test_recursive_dirichlet_edge():
    params = DirichletParams((2, 5, 3))
    tri = marginalize(dirichlet_density(DirichletParams((2, 5, 3, 4))), 4, 6, 200)
    edge = recursive_marginalize(tri, 3, 6, 200)
    interior = ~edge.boundary
    exact = stats.beta.pdf(edge.nodes[interior, 0], 2, 5)
    assert np.max(np.abs(edge.values[interior] - exact)) < 2e-2
    assert dirichlet_marginal(params, {1, 2}).alpha == (2.0, 5.0)


# serialization


def test_json_round_trip_is_bit_exact(rng):
    nodes = subdivision_nodes(4, 2, 3)
    g = DensityGrid((1, 2, 3, 4), 2, 3, nodes, rng.random(len(nodes)) * 1e3, "pushforward")
    text = grid_to_json(g)
    back = grid_from_json(text)
    assert np.array_equal(back.values, g.values) and np.array_equal(back.nodes, g.nodes)
    assert (back.labels, back.facet, back.depth, back.mode) == (g.labels, g.facet, g.depth, g.mode)
    assert grid_to_json(back) == text
    doc = json.loads(text)
    assert set(doc) == {"dim", "labels", "facet", "depth", "mode", "nodes", "values"}


def test_grids_are_immutable():
    g = constant_grid((1, 2, 3), 1, 2)
    with pytest.raises(ValueError):
        g.values[0] = 5.0


def test_validation_report_shape():
    rep = dirichlet_validation_report((2, 5, 3), 6, 100)
    assert [f["labels"] for f in rep["facets"]] == [[2, 3], [1, 3], [1, 2]]
    assert [f["analytic"] for f in rep["facets"]] == [[5.0, 3.0], [2.0, 3.0], [2.0, 5.0]]
    for f in rep["facets"]:
        assert f["pushforward"]["integral"] == pytest.approx(1.0, abs=1e-12)
        assert f["line_integral"]["integral"] > 0
