"""Recover a point set from facet projections whose labels were lost.

Every facet holds L projections in arbitrary order. Each facet contributes one
consecutive ratio r_{j,j+1} per projection; a choice of one candidate ratio
per facet belongs to a real point only if the cycle of ratios multiplies to
one (generalized Ceva). Cycle search runs depth-first in log space with
interval pruning, survivors are checked for full pairwise compatibility, and
an exact-cover search picks L disjoint tuples.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import (
    AmbiguousAssignment,
    DimensionTooSmall,
    MixedDimensions,
    NoFeasibleAssignment,
    PostMatchIncompatibility,
    ValidationError,
)
from .geometry import BarycentricPoint, FacetProjection, is_compatible, perspective_project, ratio
from .projection import ProjectionBundle, cycle_facet, reconstruct, validate_image

CYCLE_TOL = 1e-6
MATCH_COMPAT_TOL = 1e-8
DEGENERACY_TOL = 1e-7
MAX_SOLUTIONS = 8


@dataclass(frozen=True)
class UnlabeledFacetSets:
    """J multisets of facet projections; entry l of one facet says nothing about entry l of another."""

    per_facet: tuple[tuple[FacetProjection, ...], ...]

    def __post_init__(self):
        per_facet = tuple(tuple(s) for s in self.per_facet)
        object.__setattr__(self, "per_facet", per_facet)
        J = len(per_facet)
        if J < 3:
            raise DimensionTooSmall(f"need J >= 3 facets, got {J}")
        sizes = {len(s) for s in per_facet}
        if len(sizes) != 1:
            raise ValidationError(f"facet multisets differ in size: {sorted(sizes)}")
        for j, s in enumerate(per_facet, start=1):
            for p in s:
                if p.dropped != j or p.dim != J:
                    raise ValidationError(f"facet {j} holds a projection about vertex {p.dropped} (dim {p.dim})")

    @property
    def dim(self) -> int:
        return len(self.per_facet)

    @property
    def L(self) -> int:
        return len(self.per_facet[0])

    def facet(self, dropped: int) -> tuple[FacetProjection, ...]:
        return self.per_facet[dropped - 1]


@dataclass(frozen=True)
class DegeneracyNote:
    """Several projections on one facet coincide, so their labels are interchangeable."""

    facet: int
    indices: tuple[int, ...]

    def __str__(self):
        return f"facet {self.facet}: projections {list(self.indices)} coincide within {DEGENERACY_TOL:g}"


@dataclass(frozen=True)
class MatchAssignment:
    """L tuples, each naming one projection index per facet (facet order 1..J)."""

    tuples: tuple[tuple[int, ...], ...]
    residuals: tuple[float, ...]
    notes: tuple[DegeneracyNote, ...] = field(default=())

    @property
    def residual_sum(self) -> float:
        return math.fsum(self.residuals)


def project_set(points: Sequence[BarycentricPoint], seed: int | None = 0, shuffle: bool = True) -> UnlabeledFacetSets:
    """Project every point onto every facet and forget which projection came from which point.

    Each facet's list is permuted independently with a generator seeded by
    ``seed``; ``shuffle=False`` keeps input order (labels intact).
    """
    points = list(points)
    if not points:
        raise ValidationError("project_set needs at least one point")
    dims = {p.dim for p in points}
    if len(dims) != 1:
        raise MixedDimensions(f"points of several dimensions: {sorted(dims)}")
    J = dims.pop()
    if J < 3:
        raise DimensionTooSmall(f"projection needs J >= 3, got J={J}")
    rng = np.random.default_rng(seed)
    per_facet = []
    for j in range(1, J + 1):
        projs = [perspective_project(p, j) for p in points]
        if shuffle:
            projs = [projs[i] for i in rng.permutation(len(projs))]
        per_facet.append(tuple(projs))
    return UnlabeledFacetSets(tuple(per_facet))


def candidate_ratio_sets(u: UnlabeledFacetSets) -> tuple[tuple[float, ...], ...]:
    """Set j holds r_{j,j+1} for every projection on the facet opposite vertex j+2."""
    J = u.dim
    return tuple(
        tuple(ratio(p, j, j % J + 1) for p in u.facet(cycle_facet(j, J)))
        for j in range(1, J + 1)
    )


def _cycle_search(ratio_sets, tol):
    """All index tuples (one per set) whose ratios multiply to 1 within ``tol`` (relative).

    Returns ``(indices, residual)`` pairs with indices in set order.
    """
    J = len(ratio_sets)
    lo, hi = math.log1p(-tol) if tol < 1 else -math.inf, math.log1p(tol)
    logs = [[math.log(r) for r in s] for s in ratio_sets]
    order = [sorted(range(len(s)), key=s.__getitem__) for s in logs]
    vals = [[s[i] for i in o] for s, o in zip(logs, order)]
    suffix_min = [0.0] * (J + 1)
    suffix_max = [0.0] * (J + 1)
    for j in range(J - 1, -1, -1):
        suffix_min[j] = suffix_min[j + 1] + vals[j][0]
        suffix_max[j] = suffix_max[j + 1] + vals[j][-1]

    found = []

    def dfs(level, acc, chosen):
        if level == J - 1:
            last = vals[level]
            for pos in range(bisect_left(last, lo - acc), bisect_right(last, hi - acc)):
                idx = tuple(chosen) + (order[level][pos],)
                prod = math.prod(ratio_sets[k][i] for k, i in enumerate(idx))
                found.append((idx, abs(prod - 1.0)))
            return
        for pos, v in enumerate(vals[level]):
            s = acc + v
            if s + suffix_min[level + 1] > hi:
                break
            if s + suffix_max[level + 1] < lo:
                continue
            chosen.append(order[level][pos])
            dfs(level + 1, s, chosen)
            chosen.pop()

    dfs(0, 0.0, [])
    return found


def _set_to_facet_order(idx, J):
    """Re-index a tuple given per cycle set into per-facet order."""
    out = [0] * J
    for j, i in enumerate(idx, start=1):
        out[cycle_facet(j, J) - 1] = i
    return tuple(out)


def _fully_compatible(projs, tol):
    return all(is_compatible(a, b, tol) for a, b in combinations(projs, 2))


def find_concurrencies(u: UnlabeledFacetSets, tol: float = CYCLE_TOL, compat_tol: float | None = MATCH_COMPAT_TOL):
    """Every facet-index tuple whose cycle closes within ``tol``.

    With ``compat_tol`` set, tuples whose projections are not pairwise
    compatible are dropped. Returns ``(tuple, residual)`` pairs, tuples in
    facet order.
    """
    J = u.dim
    out = []
    for idx, res in _cycle_search(candidate_ratio_sets(u), tol):
        tup = _set_to_facet_order(idx, J)
        if compat_tol is not None:
            projs = [u.per_facet[f][i] for f, i in enumerate(tup)]
            if not _fully_compatible(projs, compat_tol):
                continue
        out.append((tup, res))
    return out


def _cluster(projs):
    """Group projections of one facet that coincide within DEGENERACY_TOL."""
    classes: list[list[int]] = []
    for i, p in enumerate(projs):
        for members in classes:
            rep = projs[members[0]]
            if max(abs(a - b) for a, b in zip(rep.weights, p.weights)) < DEGENERACY_TOL:
                members.append(i)
                break
        else:
            classes.append([i])
    return classes


def _exact_covers(candidates, capacity, L, limit):
    """Multisets of L candidate tuples that use every class exactly ``capacity`` times.

    Branches on the lowest facet-1 class with capacity left; within one class
    candidate indices are non-decreasing so each multiset is produced once.
    """
    J = len(capacity)
    remaining = [list(c) for c in capacity]
    by_first: dict[int, list[int]] = {}
    for ci, (tup, _) in enumerate(candidates):
        by_first.setdefault(tup[0], []).append(ci)
    solutions = []

    def fits(tup):
        return all(remaining[f][c] > 0 for f, c in enumerate(tup))

    def take(tup, delta):
        for f, c in enumerate(tup):
            remaining[f][c] -= delta

    def dfs(chosen, cost, start_cls, start_pos):
        if len(solutions) >= limit:
            return
        if len(chosen) == L:
            solutions.append((cost, list(chosen)))
            return
        cls = next((c for c in range(start_cls, len(remaining[0])) if remaining[0][c] > 0), None)
        if cls is None:
            return
        pos0 = start_pos if cls == start_cls else 0
        options = by_first.get(cls, [])
        for pos in range(pos0, len(options)):
            ci = options[pos]
            tup, res = candidates[ci]
            if not fits(tup):
                continue
            take(tup, 1)
            chosen.append(ci)
            dfs(chosen, cost + res, cls, pos)
            chosen.pop()
            take(tup, -1)

    dfs([], 0.0, 0, 0)
    return sorted(solutions, key=lambda s: s[0])


def _same_point_multiset(a, b):
    pa = sorted(a)
    pb = sorted(b)
    return all(max(abs(x - y) for x, y in zip(p, q)) < DEGENERACY_TOL for p, q in zip(pa, pb))


def match(u: UnlabeledFacetSets, tol: float = CYCLE_TOL, compat_tol: float = MATCH_COMPAT_TOL) -> MatchAssignment:
    """Relabel unlabeled facet projections into L per-point tuples.

    ``tol`` bounds |prod(cycle) - 1| for candidate generation; ``compat_tol``
    is the stricter pairwise compatibility check every accepted tuple must
    pass. Raises :class:`NoFeasibleAssignment` when no disjoint cover exists
    and :class:`AmbiguousAssignment` when two covers lead to different point
    sets.
    """
    J, L = u.dim, u.L
    classes = [_cluster(s) for s in u.per_facet]
    reps = UnlabeledFacetSets(
        tuple(tuple(u.per_facet[f][m[0]] for m in classes[f]) for f in range(J))
    )
    candidates = []
    for idx, res in _cycle_search(candidate_ratio_sets(reps), tol):
        tup = _set_to_facet_order(idx, J)
        projs = [reps.per_facet[f][c] for f, c in enumerate(tup)]
        if _fully_compatible(projs, compat_tol):
            candidates.append((tup, res))
    candidates.sort(key=lambda c: (c[1], c[0]))
    capacity = [[len(m) for m in classes[f]] for f in range(J)]
    covers = _exact_covers(candidates, capacity, L, MAX_SOLUTIONS)
    if not covers:
        raise NoFeasibleAssignment(
            f"no {L} disjoint concurrent tuples among {len(candidates)} candidates; "
            "input is not the projection of a point set"
        )
    best_cost, best = covers[0]
    if len(covers) > 1:
        points = []
        for _, cover in covers:
            pts = []
            for ci in cover:
                tup = candidates[ci][0]
                bundle = ProjectionBundle(tuple(reps.per_facet[f][c] for f, c in enumerate(tup)))
                pts.append(reconstruct(bundle, tol=math.inf).weights)
            points.append(pts)
        for other, (cost, _) in zip(points[1:], covers[1:]):
            if not _same_point_multiset(points[0], other):
                raise AmbiguousAssignment(
                    f"two disjoint assignments within tolerance (residual sums {best_cost:.3e} and {cost:.3e})",
                    residual_sums=(best_cost, cost),
                )

    queues = [[list(m) for m in classes[f]] for f in range(J)]
    tuples, residuals = [], []
    for ci in best:
        tup, res = candidates[ci]
        tuples.append(tuple(queues[f][c].pop(0) for f, c in enumerate(tup)))
        residuals.append(res)
    notes = tuple(
        DegeneracyNote(f + 1, tuple(m))
        for f in range(J)
        for m in classes[f]
        if len(m) > 1
    )
    order = sorted(range(L), key=lambda i: tuples[i])
    return MatchAssignment(
        tuple(tuples[i] for i in order),
        tuple(residuals[i] for i in order),
        notes,
    )


def reconstruct_set(u: UnlabeledFacetSets, m: MatchAssignment, compat_tol: float = MATCH_COMPAT_TOL) -> list[BarycentricPoint]:
    """Rebuild one point per matched tuple, re-checking full compatibility first."""
    J, L = u.dim, u.L
    if len(m.tuples) != L:
        raise ValidationError(f"assignment has {len(m.tuples)} tuples for {L} points")
    for f in range(J):
        used = sorted(t[f] for t in m.tuples)
        if used != list(range(L)):
            raise ValidationError(f"assignment does not use every projection of facet {f + 1} exactly once")
    points = []
    for tup in m.tuples:
        bundle = ProjectionBundle(tuple(u.per_facet[f][i] for f, i in enumerate(tup)))
        if not validate_image(bundle, compat_tol):
            raise PostMatchIncompatibility(
                f"tuple {tup} closes its ratio cycle but is not fully compatible at {compat_tol:g}"
            )
        points.append(reconstruct(bundle, tol=compat_tol))
    return points
