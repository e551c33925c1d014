import math

import numpy as np
import pytest

from simplex_projection.errors import AmbiguousAssignment, NoFeasibleAssignment, PostMatchIncompatibility
from simplex_projection.geometry import BarycentricPoint, perspective_project, ratio
from simplex_projection.matching import (
    MatchAssignment,
    UnlabeledFacetSets,
    candidate_ratio_sets,
    find_concurrencies,
    match,
    project_set,
    reconstruct_set,
)
from simplex_projection.projection import project_all, reconstruct

from .conftest import random_points


def sorted_rows(points):
    return np.array(sorted(tuple(p.weights) for p in points))


def recovered(points, seed=0, **kw):
    u = project_set(points, seed=seed)
    m = match(u, **kw)
    return u, m, reconstruct_set(u, m)


def test_project_set_structure(rng):
    pts = random_points(rng, 4, 2)
    u = project_set(pts, seed=3)
    assert u.dim == 4 and u.L == 2
    for j in range(1, 5):
        assert sorted(p.weights for p in u.facet(j)) == sorted(perspective_project(p, j).weights for p in pts)


def test_project_set_permutation_invariant(rng):
    pts = random_points(rng, 4, 6)
    a = project_set(pts, seed=1)
    b = project_set(pts[::-1], seed=9)
    for j in range(1, 5):
        assert sorted(p.weights for p in a.facet(j)) == sorted(p.weights for p in b.facet(j))


def test_labeled_candidates_close_the_cycle(rng):
    pts = random_points(rng, 5, 4)
    sets = candidate_ratio_sets(project_set(pts, shuffle=False))
    for l in range(4):
        assert math.prod(s[l] for s in sets) == pytest.approx(1.0, abs=1e-13)
    # set j draws r_{j,j+1} from the facet opposite j+2
    for j in range(1, 6):
        assert sets[j - 1][0] == pytest.approx(ratio(pts[0], j, j % 5 + 1), rel=1e-14)


def test_single_point(rng):
    (p,) = random_points(rng, 4, 1)
    u, m, pts = recovered([p])
    assert m.tuples == ((0, 0, 0, 0),)
    assert m.residual_sum < 1e-14
    assert np.allclose(pts[0].weights, reconstruct(project_all(p)).weights, atol=1e-15, rtol=0)


@pytest.mark.parametrize("J", [3, 4, 5])
def test_three_points_recovered(rng, J):
    pts = random_points(rng, J, 3)
    _, m, out = recovered(pts, seed=7)
    assert len(m.tuples) == 3
    assert np.max(np.abs(sorted_rows(out) - sorted_rows(pts))) < 1e-12


def test_duplicate_point_is_noted_not_an_error(rng):
    a, b = random_points(rng, 4, 2)
    _, m, out = recovered([a, b, a], seed=2)
    assert {n.facet for n in m.notes} == {1, 2, 3, 4}
    assert all(len(n.indices) == 2 for n in m.notes)
    assert np.max(np.abs(sorted_rows(out) - sorted_rows([a, b, a]))) < 1e-12


def test_repeated_centroid():
    c = BarycentricPoint((0.25,) * 4)
    _, m, out = recovered([c] * 5)
    assert len(out) == 5
    for p in out:
        assert np.allclose(p.weights, 0.25, atol=1e-15)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_shuffle_does_not_change_result(rng, seed):
    pts = random_points(rng, 4, 10)
    _, _, out = recovered(pts, seed=seed)
    assert np.max(np.abs(sorted_rows(out) - sorted_rows(pts))) < 1e-12


@pytest.mark.parametrize("J", [3, 4])
def test_exactly_L_concurrencies(rng, J):
    L = 12
    u = project_set(random_points(rng, J, L), seed=5)
    found = find_concurrencies(u, tol=1e-9)
    assert len(found) == L
    assert all(res < 1e-9 for _, res in found)


def test_spurious_cycles_fail_full_compatibility(rng):
    L = 15
    u = project_set(random_points(rng, 4, L), seed=11)
    loose = find_concurrencies(u, tol=0.05, compat_tol=None)
    strict = find_concurrencies(u, tol=0.05)
    assert len(loose) > L  # the loose cycle test admits impostors
    assert len(strict) == L
    for tup, _ in strict:
        assert tup in {t for t, _ in loose}


def test_no_feasible_assignment(rng):
    pts = random_points(rng, 4, 3)
    others = random_points(rng, 4, 3)
    u = project_set(pts, seed=0)
    per_facet = list(u.per_facet)
    per_facet[0] = tuple(perspective_project(q, 1) for q in others)
    with pytest.raises(NoFeasibleAssignment):
        match(UnlabeledFacetSets(tuple(per_facet)))


def _ambiguous_triangle_sets():
    """Edge projections of a triangle whose cycle sets admit two disjoint closing pairings.

    In log space the sets are P (r12), Q (r23), S (r31). Both the identity
    pairing and the one shifting Q by one place sum to zero everywhere, yet
    they pair P with different Q values and so describe different points.
    """
    P = 0.5 * np.array([0.0, 2.0, -1.0])
    Q = 0.5 * np.array([0.0, -3.0, -2.0])
    S = 0.5 * np.array([0.0, 1.0, 3.0])

    def edge(vec, j):
        v = np.asarray(vec)
        return perspective_project(BarycentricPoint(tuple(v / v.sum())), j)

    f3 = tuple(edge([math.exp(p), 1.0, 1.0], 3) for p in P)
    f1 = tuple(edge([1.0, math.exp(q), 1.0], 1) for q in Q)
    f2 = tuple(edge([1.0, 1.0, math.exp(s)], 2) for s in S)
    return UnlabeledFacetSets((f1, f2, f3)), P, Q, S


def test_ambiguous_construction_is_sound():
    u, P, Q, S = _ambiguous_triangle_sets()
    sets = candidate_ratio_sets(u)
    for logs, ratios in zip((P, Q, S), sets):
        assert np.allclose(np.log(ratios), logs, atol=1e-14)
    shift = [1, 2, 0]
    assert np.allclose(P + Q + S, 0)
    # second pairing: S must contain -(P + Q[shift]) as a multiset
    assert sorted(-(P + Q[shift])) == pytest.approx(sorted(S))
    pairs_a = sorted(zip(P, Q))
    pairs_b = sorted(zip(P, Q[shift]))
    assert pairs_a != pairs_b


def test_ambiguous_assignment_raises():
    u, *_ = _ambiguous_triangle_sets()
    with pytest.raises(AmbiguousAssignment) as info:
        match(u)
    assert len(info.value.residual_sums) == 2


def test_post_match_incompatibility(rng):
    a, b = random_points(rng, 4, 2)
    u = project_set([a, b], shuffle=False)
    wrong = MatchAssignment(((0, 1, 0, 0), (1, 0, 1, 1)), (0.0, 0.0))
    with pytest.raises(PostMatchIncompatibility):
        reconstruct_set(u, wrong)
