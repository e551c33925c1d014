"""Barycentric-coordinate arithmetic on the open simplex.

Components are labelled 1..J everywhere in the public interface. Points are
small (J is rarely above 8), so plain tuples of floats are used instead of
numpy arrays; this keeps per-point overhead low when millions of projections
are built in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .errors import (
    DimensionMismatch,
    DimensionTooSmall,
    EmptyIndexSet,
    IndexAbsent,
    IndexOutOfRange,
    NonPositiveComponent,
    SumOutOfTolerance,
    UnsupportedDimensionForRendering,
    ValidationError,
)

SUM_TOL = 1e-9
RENORMALIZE_TOL = 1e-3
COMPAT_TOL = 1e-10

STRICT = "strict"
RENORMALIZE = "renormalize"
POLICIES = (STRICT, RENORMALIZE)


def _check_open_simplex(weights: Sequence[float], what: str, allow_one: bool = False) -> None:
    for k, w in enumerate(weights, start=1):
        if not math.isfinite(w) or w <= 0.0:
            raise NonPositiveComponent(f"{what}: component {k} = {w!r} is not strictly positive")
        if w >= 1.0 and not allow_one:
            raise NonPositiveComponent(f"{what}: component {k} = {w!r} leaves no room for the others")
    total = math.fsum(weights)
    if abs(total - 1.0) > SUM_TOL:
        raise SumOutOfTolerance(f"{what}: components sum to {total!r}, expected 1 within {SUM_TOL}")


@dataclass(frozen=True)
class BarycentricPoint:
    """A point of the open simplex, given by J strictly positive weights."""

    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.weights) < 2:
            raise DimensionTooSmall(f"need at least 2 components, got {len(self.weights)}")
        _check_open_simplex(self.weights, "BarycentricPoint")

    @property
    def dim(self) -> int:
        return len(self.weights)

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(range(1, len(self.weights) + 1))

    def component(self, label: int) -> float:
        if not 1 <= label <= len(self.weights):
            raise IndexAbsent(f"label {label} not in 1..{len(self.weights)}")
        return self.weights[label - 1]

    def __iter__(self):
        return iter(self.weights)

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True)
class FacetProjection:
    """A point on the facet opposite vertex ``dropped`` of a (J-1)-simplex.

    ``weights`` holds the J-1 renormalized coordinates in increasing label
    order, i.e. for labels ``1..J`` without ``dropped``.
    """

    dropped: int
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "dropped", int(self.dropped))
        if not self.weights:
            raise DimensionTooSmall("a facet projection needs at least one weight")
        if not 1 <= self.dropped <= len(self.weights) + 1:
            raise IndexOutOfRange(f"dropped vertex {self.dropped} not in 1..{len(self.weights) + 1}")
        _check_open_simplex(self.weights, f"FacetProjection(dropped={self.dropped})", allow_one=True)

    @property
    def dim(self) -> int:
        return len(self.weights) + 1

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(k for k in range(1, self.dim + 1) if k != self.dropped)

    def component(self, label: int) -> float:
        if label == self.dropped or not 1 <= label <= self.dim:
            raise IndexAbsent(f"label {label} is not on facet opposite vertex {self.dropped}")
        return self.weights[label - 1 if label < self.dropped else label - 2]


@dataclass(frozen=True)
class CartesianPoint2D:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValidationError(f"non-finite canvas coordinate ({self.x}, {self.y})")


PointLike = Union[BarycentricPoint, FacetProjection]


def validate(raw: Iterable[float], policy: str = STRICT) -> BarycentricPoint:
    """Turn raw proportions into a :class:`BarycentricPoint`.

    ``strict`` accepts the vector only if it already sums to one within
    ``SUM_TOL``. ``renormalize`` divides by the sum when the drift is at most
    ``RENORMALIZE_TOL``. Neither policy ever clamps a zero or negative entry.
    """
    values = tuple(float(v) for v in raw)
    if len(values) < 2:
        raise DimensionTooSmall(f"need at least 2 components, got {len(values)}")
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    for k, v in enumerate(values, start=1):
        if not math.isfinite(v) or v <= 0.0:
            raise NonPositiveComponent(f"component {k} = {v!r} is not strictly positive")
    if policy == RENORMALIZE:
        total = math.fsum(values)
        if abs(total - 1.0) > RENORMALIZE_TOL:
            raise SumOutOfTolerance(
                f"components sum to {total!r}; renormalize accepts drift up to {RENORMALIZE_TOL}"
            )
        values = tuple(v / total for v in values)
    return BarycentricPoint(values)


def renormalize(p: PointLike, keep: Iterable[int]) -> tuple[float, ...]:
    """Renormalized coordinates of the labels in ``keep`` (ascending label order)."""
    labels = sorted(set(keep))
    if not labels:
        raise EmptyIndexSet("renormalize needs a nonempty index set")
    sub = [p.component(k) for k in labels]
    total = math.fsum(sub)
    return tuple(v / total for v in sub)


def ratio(p: PointLike, n: int, m: int) -> float:
    """pi_n / pi_m; invariant under any renormalization that keeps n and m."""
    return p.component(n) / p.component(m)


def perspective_project(p: BarycentricPoint, j: int) -> FacetProjection:
    """Project ``p`` from vertex ``j`` onto the opposite facet."""
    if not 1 <= j <= p.dim:
        raise IndexOutOfRange(f"vertex {j} not in 1..{p.dim}")
    keep = [k for k in range(1, p.dim + 1) if k != j]
    return FacetProjection(j, renormalize(p, keep))


def is_compatible(a: PointLike, b: PointLike, tol: float = COMPAT_TOL) -> bool:
    """True when ``a`` and ``b`` agree on the renormalized shared coordinates."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"points live in simplices of different dimension ({a.dim} vs {b.dim})")
    shared = sorted(set(a.labels) & set(b.labels))
    if len(shared) < 2:
        # a single shared label renormalizes to (1.0,) on both sides
        return True
    ra = renormalize(a, shared)
    rb = renormalize(b, shared)
    return all(abs(x - y) <= tol for x, y in zip(ra, rb))


def embed_regular_simplex(J: int):
    """Canvas embedding of the regular simplex with unit side.

    J=3 gives the triangle ``(0,0), (1,0), (1/2, sqrt(3)/2)``. J=4 gives the
    unfolded tetrahedron net as a mapping ``dropped -> ((label, vertex), ...)``
    where the central facet is the one opposite vertex 4.
    """
    h = math.sqrt(3.0) / 2.0
    v1, v2, v3 = CartesianPoint2D(0.0, 0.0), CartesianPoint2D(1.0, 0.0), CartesianPoint2D(0.5, h)
    if J == 3:
        return (v1, v2, v3)
    if J == 4:
        return {
            4: ((1, v1), (2, v2), (3, v3)),
            3: ((1, v1), (2, v2), (4, reflect(v3, v1, v2))),
            2: ((1, v1), (3, v3), (4, reflect(v2, v1, v3))),
            1: ((2, v2), (3, v3), (4, reflect(v1, v2, v3))),
        }
    raise UnsupportedDimensionForRendering(f"only J=3 (triangle) and J=4 (net) can be drawn, got J={J}")


def reflect(p: CartesianPoint2D, a: CartesianPoint2D, b: CartesianPoint2D) -> CartesianPoint2D:
    """Mirror ``p`` across the line through ``a`` and ``b``."""
    dx, dy = b.x - a.x, b.y - a.y
    t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / (dx * dx + dy * dy)
    fx, fy = a.x + t * dx, a.y + t * dy
    return CartesianPoint2D(2 * fx - p.x, 2 * fy - p.y)


def to_cartesian(weights: Sequence[float], vertices: Sequence[CartesianPoint2D]) -> CartesianPoint2D:
    if len(weights) != len(vertices):
        raise DimensionMismatch(f"{len(weights)} weights for {len(vertices)} vertices")
    return CartesianPoint2D(
        math.fsum(w * v.x for w, v in zip(weights, vertices)),
        math.fsum(w * v.y for w, v in zip(weights, vertices)),
    )
