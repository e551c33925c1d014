"""The simplex projection of one point and its exact inverse.

A point of the (J-1)-simplex is sent to the tuple of its J perspective
projections, one per facet. Coordinate ratios survive each projection, so J-1
consecutive ratios plus the sum-to-one constraint pin the point down again.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import (
    DimensionMismatch,
    DimensionTooSmall,
    IncompatibleBundle,
    IncompatiblePair,
    SameFacet,
    SingularSystem,
    ValidationError,
)
from .geometry import (
    COMPAT_TOL,
    BarycentricPoint,
    FacetProjection,
    is_compatible,
    perspective_project,
    ratio,
)

RATIO_MAX = 1e12
RATIO_MIN = 1e-12


class ConditioningWarning(UserWarning):
    """A coordinate ratio is so extreme that the ratio chain is ill-conditioned."""


@dataclass(frozen=True)
class ProjectionBundle:
    """The J facet projections of one point, the j-th one taken about vertex j."""

    projections: tuple[FacetProjection, ...]

    def __post_init__(self):
        projs = tuple(self.projections)
        object.__setattr__(self, "projections", projs)
        J = len(projs)
        if J < 3:
            raise DimensionTooSmall(f"a projection bundle needs J >= 3 facets, got {J}")
        for j, p in enumerate(projs, start=1):
            if p.dim != J:
                raise DimensionMismatch(f"facet {j} projection has dimension {p.dim}, bundle has {J}")
            if p.dropped != j:
                raise ValidationError(f"slot {j} holds the projection about vertex {p.dropped}")

    @property
    def dim(self) -> int:
        return len(self.projections)

    def __getitem__(self, dropped: int) -> FacetProjection:
        return self.projections[dropped - 1]


@dataclass(frozen=True)
class RatioCycle:
    """Consecutive ratios (r_12, r_23, ..., r_J1); their product is one for a real point."""

    ratios: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "ratios", tuple(float(r) for r in self.ratios))
        for r in self.ratios:
            if not (math.isfinite(r) and r > 0.0):
                raise ValidationError(f"cycle ratio {r!r} is not finite and positive")

    @property
    def product(self) -> float:
        return math.prod(self.ratios)

    @property
    def residual(self) -> float:
        return abs(self.product - 1.0)


def cycle_facet(j: int, J: int) -> int:
    """Facet that supplies the cycle ratio r_{j, j+1}.

    It is the facet opposite vertex j+2 (indices cyclic in 1..J), which keeps
    both j and j+1 and gives every facet exactly one ratio.
    """
    return (j + 1) % J + 1


def project_all(p: BarycentricPoint) -> ProjectionBundle:
    if p.dim < 3:
        raise DimensionTooSmall(f"projection needs J >= 3, got J={p.dim}")
    return ProjectionBundle(tuple(perspective_project(p, j) for j in range(1, p.dim + 1)))


def extract_cycle(b: ProjectionBundle) -> RatioCycle:
    J = b.dim
    return RatioCycle(
        tuple(ratio(b[cycle_facet(j, J)], j, j % J + 1) for j in range(1, J + 1))
    )


def validate_image(b: ProjectionBundle, tol: float = COMPAT_TOL) -> bool:
    """Whether ``b`` is the projection bundle of some point.

    Checks pairwise compatibility of all facet projections and, in addition,
    that the ratio cycle closes. For J=3 two edges share a single vertex, so
    pairwise compatibility holds vacuously and only the cycle test has teeth.
    """
    projs = b.projections
    for a, c in combinations(projs, 2):
        if not is_compatible(a, c, tol):
            return False
    return extract_cycle(b).residual <= tol


def _warn_conditioning(ratios):
    for r in ratios:
        if r > RATIO_MAX or r < RATIO_MIN:
            warnings.warn(
                f"coordinate ratio {r:.3e} outside [{RATIO_MIN:g}, {RATIO_MAX:g}]; "
                "reconstruction may lose precision",
                ConditioningWarning,
                stacklevel=3,
            )


def solve_ratio_chain(ratios, solver: str = "backsub") -> tuple[float, ...]:
    """Solve pi_j = r_j * pi_{j+1} (j < J) together with sum(pi) = 1.

    ``backsub`` chains the ratios from pi_J = 1 and divides by the total.
    ``matrix`` builds the full J x J system and hands it to numpy; it exists
    to cross-check the closed form.
    """
    ratios = [float(r) for r in ratios]
    J = len(ratios) + 1
    if solver == "backsub":
        pis = [1.0] * J
        for j in range(J - 2, -1, -1):
            pis[j] = ratios[j] * pis[j + 1]
        total = math.fsum(pis)
        if not (math.isfinite(total) and total > 0.0):
            raise SingularSystem(f"ratio chain produced total {total!r}")
        return tuple(v / total for v in pis)
    if solver == "matrix":
        A = np.zeros((J, J))
        for j in range(J - 1):
            A[j, j] = 1.0
            A[j, j + 1] = -ratios[j]
        A[J - 1, :] = 1.0
        rhs = np.zeros(J)
        rhs[-1] = 1.0
        try:
            sol = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularSystem(str(exc)) from exc
        return tuple(float(v) for v in sol)
    raise ValueError(f"unknown solver {solver!r}")


def reconstruct(b: ProjectionBundle, tol: float = COMPAT_TOL, solver: str = "backsub") -> BarycentricPoint:
    """Invert :func:`project_all`."""
    if not validate_image(b, tol):
        raise IncompatibleBundle("bundle is not the projection of a single point")
    chain = extract_cycle(b).ratios[:-1]
    _warn_conditioning(chain)
    return BarycentricPoint(solve_ratio_chain(chain, solver))


def reconstruct_from_two(a: FacetProjection, b: FacetProjection, tol: float = COMPAT_TOL) -> BarycentricPoint:
    """Recover the source point from its projections onto two different facets.

    ``a`` fixes every coordinate except the one of its dropped vertex n, up to
    a common scale. ``b`` still sees vertex n and supplies the missing ratio
    pi_n / pi_k against a label k that both facets keep.
    """
    if a.dim != b.dim:
        raise DimensionMismatch(f"projections from simplices of dimension {a.dim} and {b.dim}")
    if a.dropped == b.dropped:
        raise SameFacet(f"both projections lie on the facet opposite vertex {a.dropped}")
    if a.dim < 3:
        raise DimensionTooSmall("two-facet reconstruction needs J >= 3")
    if not is_compatible(a, b, tol):
        raise IncompatiblePair("projections disagree on their shared coordinates")
    n, m = a.dropped, b.dropped
    shared = [k for k in a.labels if k != m]
    anchor = max(shared, key=b.component)
    r = ratio(b, n, anchor)
    _warn_conditioning([r])
    raw = [a.component(k) if k != n else r * a.component(anchor) for k in range(1, a.dim + 1)]
    total = math.fsum(raw)
    return BarycentricPoint(tuple(v / total for v in raw))
