"""Marginal densities of a simplex density on its facets.

A facet grid is the regular barycentric lattice with ``N = 2**depth`` steps per
edge. For every node z the density is summed along the segment from z to the
dropped vertex at M equidistant points, the two endpoints counting as zero.

Two weightings are offered:

``line_integral``
    each sample weighs ``|s| / M`` where ``|s|`` is the Euclidean segment
    length in the unit-side regular simplex. This is the plain line integral.
``pushforward``
    each sample weighs ``t**k / (M - 1)``, ``t`` being the fractional distance
    from the vertex and ``k`` the facet dimension; the grid is then rescaled
    to integrate to one. The result is the density of the projected point.

Densities are taken with respect to Lebesgue measure on the coordinate patch
that drops one component, so Dir(1, 1, 1) has density 2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import (
    AccuracyTooLow,
    DepthOutOfRange,
    DimensionMismatch,
    DimensionTooSmall,
    EmptyIndexSet,
    EvalFailure,
    FacetTooSmall,
    IndexAbsent,
    OutsideFacet,
    ValidationError,
)
from .geometry import BarycentricPoint, FacetProjection

LINE_INTEGRAL = "line_integral"
PUSHFORWARD = "pushforward"
MODES = (LINE_INTEGRAL, PUSHFORWARD)
MAX_DEPTH = 14
_CHUNK_EVALS = 2_000_000


@dataclass(frozen=True)
class DirichletParams:
    alpha: tuple[float, ...]

    def __post_init__(self):
        alpha = tuple(float(a) for a in self.alpha)
        object.__setattr__(self, "alpha", alpha)
        if len(alpha) < 2:
            raise DimensionTooSmall(f"Dirichlet needs at least 2 parameters, got {len(alpha)}")
        if not all(math.isfinite(a) and a > 0 for a in alpha):
            raise ValidationError(f"concentration parameters must be positive, got {alpha}")

    @property
    def dim(self) -> int:
        return len(self.alpha)

    @property
    def log_norm(self) -> float:
        return math.lgamma(math.fsum(self.alpha)) - math.fsum(math.lgamma(a) for a in self.alpha)


def dirichlet_logpdf_array(params: DirichletParams, X: np.ndarray) -> np.ndarray:
    """Log density at the rows of ``X``; rows may sit on the closed simplex.

    A zero coordinate gives ``-inf`` for alpha > 1, ``+inf`` for alpha < 1
    and contributes nothing for alpha == 1.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[-1] != params.dim:
        raise DimensionMismatch(f"points have {X.shape[-1]} components, Dirichlet has {params.dim}")
    a1 = np.asarray(params.alpha) - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(a1 == 0.0, 0.0, a1 * np.log(X))
    return params.log_norm + terms.sum(axis=-1)


def dirichlet_pdf(params: DirichletParams, p: BarycentricPoint) -> float:
    if p.dim != params.dim:
        raise DimensionMismatch(f"point has {p.dim} components, Dirichlet has {params.dim}")
    return math.exp(params.log_norm + math.fsum((a - 1.0) * math.log(w) for a, w in zip(params.alpha, p.weights)))


def dirichlet_marginal(params: DirichletParams, keep: Iterable[int]) -> DirichletParams:
    """Distribution of the renormalized subvector on the labels in ``keep``."""
    labels = sorted(set(keep))
    if not labels:
        raise EmptyIndexSet("dirichlet_marginal needs a nonempty index set")
    for k in labels:
        if not 1 <= k <= params.dim:
            raise IndexAbsent(f"label {k} not in 1..{params.dim}")
    return DirichletParams(tuple(params.alpha[k - 1] for k in labels))


@dataclass(frozen=True)
class SimplexDensity:
    """A density on the simplex spanned by the component ``labels``.

    ``eval`` receives an ``(n, dim)`` array of barycentric rows (columns in
    label order) and returns ``n`` nonnegative values. Set
    ``vectorized=False`` for callables that take a single row at a time.
    """

    dim: int
    eval: Callable[[np.ndarray], np.ndarray]
    labels: Optional[tuple[int, ...]] = None
    vectorized: bool = True

    def __post_init__(self):
        labels = tuple(range(1, self.dim + 1)) if self.labels is None else tuple(int(k) for k in self.labels)
        if len(labels) != self.dim or len(set(labels)) != self.dim:
            raise ValidationError(f"labels {labels} do not name {self.dim} distinct components")
        object.__setattr__(self, "labels", labels)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.vectorized:
            out = self.eval(X)
        else:
            out = [self.eval(row) for row in X]
        return np.asarray(out, dtype=float).reshape(len(X))


def dirichlet_density(params: DirichletParams) -> SimplexDensity:
    return SimplexDensity(params.dim, lambda X: np.exp(dirichlet_logpdf_array(params, X)))


# ---------------------------------------------------------------------------
# regular subdivision


def _check_depth(depth: int) -> int:
    if not isinstance(depth, (int, np.integer)) or not 1 <= depth <= MAX_DEPTH:
        raise DepthOutOfRange(f"depth must be an integer in [1, {MAX_DEPTH}], got {depth!r}")
    return int(depth)


@lru_cache(maxsize=32)
def _lattice(k: int, N: int) -> np.ndarray:
    """Nonnegative integer vectors of length k+1 summing to N, in lexicographic order."""
    rows = np.arange(N + 1, dtype=np.int64)[:, None]
    for _ in range(k - 1):
        s = rows.sum(axis=1)
        counts = N - s + 1
        rep = np.repeat(rows, counts, axis=0)
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        nxt = np.arange(len(rep), dtype=np.int64) - starts
        rows = np.column_stack([rep, nxt])
    last = N - rows.sum(axis=1)
    out = np.column_stack([rows, last])
    out.setflags(write=False)
    return out


def _keys(a: np.ndarray, N: int) -> np.ndarray:
    """Ordering key of lattice vectors: the first k entries read in base N+1."""
    k = a.shape[-1] - 1
    key = np.zeros(a.shape[:-1], dtype=np.int64)
    for i in range(k):
        key = key * (N + 1) + a[..., i]
    return key


@lru_cache(maxsize=32)
def _lattice_keys(k: int, N: int) -> np.ndarray:
    keys = _keys(_lattice(k, N), N)
    keys.setflags(write=False)
    return keys


def _u_to_a(u: np.ndarray, N: int) -> np.ndarray:
    """Cumulative coordinates (k entries) back to a lattice composition (k+1 entries)."""
    lead = u[..., :1]
    mids = np.diff(u, axis=-1)
    tail = N - u[..., -1:]
    return np.concatenate([lead, mids, tail], axis=-1)


@lru_cache(maxsize=32)
def _cells(k: int, N: int) -> np.ndarray:
    """Node indices of the Freudenthal cells tiling the facet grid, one row per cell."""
    lat = _lattice(k, N)
    keys = _lattice_keys(k, N)
    base_u = np.cumsum(lat[:, :k], axis=1)
    base_u = base_u[base_u[:, -1] <= N - 1]
    rows = []
    for perm in permutations(range(k)):
        verts = [base_u]
        cur = base_u.copy()
        for i in perm:
            cur = cur.copy()
            cur[:, i] += 1
            verts.append(cur)
        V = np.stack(verts, axis=1)  # (n, k+1, k)
        ok = np.all(np.diff(V, axis=-1) >= 0, axis=(1, 2)) & np.all(V[..., -1] <= N, axis=1)
        V = V[ok]
        idx = np.searchsorted(keys, _keys(_u_to_a(V, N), N))
        rows.append(idx)
    cells = np.concatenate(rows, axis=0)
    cells.setflags(write=False)
    return cells


@lru_cache(maxsize=32)
def _node_weights(k: int, N: int) -> np.ndarray:
    """Quadrature weights of the piecewise-affine interpolant on the coordinate patch."""
    n = len(_lattice(k, N))
    if k == 0:
        return np.ones(1)
    cells = _cells(k, N)
    vol = 1.0 / (math.factorial(k) * N**k)
    counts = np.bincount(cells.ravel(), minlength=n)
    w = counts * (vol / (k + 1))
    w.setflags(write=False)
    return w


def subdivision_nodes(J: int, facet: int, depth: int) -> np.ndarray:
    """Barycentric nodes on the facet opposite ``facet``, columns in ascending label order."""
    depth = _check_depth(depth)
    if J < 3:
        raise DimensionTooSmall(f"facets of a {J - 1}-simplex carry no grid")
    if not 1 <= facet <= J:
        raise IndexAbsent(f"facet {facet} not in 1..{J}")
    N = 2**depth
    return _lattice(J - 2, N) / N


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Marginal density values at the nodes of one facet grid.

    ``labels`` are the components of the simplex the density lived on and
    ``facet`` the label that was projected away; ``nodes`` has one column per
    remaining label, in ascending order.
    """

    labels: tuple[int, ...]
    facet: int
    depth: int
    nodes: np.ndarray
    values: np.ndarray
    mode: str

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(int(k) for k in self.labels))
        if self.facet not in self.labels:
            raise IndexAbsent(f"facet {self.facet} not among labels {self.labels}")
        if self.mode not in MODES:
            raise ValidationError(f"unknown mode {self.mode!r}")
        _check_depth(self.depth)
        k = len(self.labels) - 2
        expected = _lattice(k, self.steps).shape
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if nodes.shape != expected or values.shape != (expected[0],):
            raise ValidationError(f"grid arrays {nodes.shape}/{values.shape} do not fit {expected[0]} nodes")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValidationError("grid values must be finite and nonnegative")
        nodes.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def steps(self) -> int:
        return 2**self.depth

    @property
    def facet_labels(self) -> tuple[int, ...]:
        return tuple(sorted(k for k in self.labels if k != self.facet))

    @property
    def facet_dim(self) -> int:
        return len(self.labels) - 2

    @property
    def boundary(self) -> np.ndarray:
        """Mask of nodes on the boundary of the facet."""
        return np.any(self.nodes == 0.0, axis=1)


def _locate(k: int, N: int, Y: np.ndarray):
    """Enclosing Freudenthal cell of each row of ``Y`` and its local barycentric weights."""
    n = len(Y)
    u = N * np.cumsum(Y[:, :k], axis=1)
    u = np.clip(np.maximum.accumulate(u, axis=1), 0.0, N)
    b = np.floor(u)
    b[b >= N] = N - 1
    f = u - b
    b = b.astype(np.int64)
    # ties go to the larger index so every vertex stays inside the facet
    rev = np.argsort(-f[:, ::-1], axis=1, kind="stable")
    order = k - 1 - rev
    fs = np.take_along_axis(f, order, axis=1)
    lam = np.empty((n, k + 1))
    lam[:, 0] = 1.0 - fs[:, 0]
    lam[:, 1:k] = fs[:, :-1] - fs[:, 1:]
    lam[:, k] = fs[:, -1]
    verts = np.empty((n, k + 1, k), dtype=np.int64)
    cur = b.copy()
    verts[:, 0] = cur
    rows = np.arange(n)
    for r in range(k):
        cur = cur.copy()
        cur[rows, order[:, r]] += 1
        verts[:, r + 1] = cur
    keys = _lattice_keys(k, N)
    vk = _keys(_u_to_a(verts, N), N)
    idx = np.searchsorted(keys, vk)
    idx = np.minimum(idx, len(keys) - 1)
    miss = keys[idx] != vk
    if np.any(miss & (lam > 0)):
        raise AssertionError("interpolation cell left the facet grid")
    idx[miss] = 0
    return idx, lam


def _facet_coords(grid: DensityGrid, x) -> np.ndarray:
    if isinstance(x, FacetProjection):
        if x.dropped != grid.facet or x.dim != grid.dim:
            raise DimensionMismatch("projection does not live on this grid's facet")
        x = x.weights
    elif isinstance(x, BarycentricPoint):
        x = x.weights
    return np.asarray(x, dtype=float)


def interpolate_many(grid: DensityGrid, X) -> np.ndarray:
    """Piecewise-affine interpolation of the grid at the rows of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    k = grid.facet_dim
    if X.shape[1] != k + 1:
        raise DimensionMismatch(f"points have {X.shape[1]} coordinates, facet has {k + 1}")
    if np.any(X < -1e-9) or np.any(np.abs(X.sum(axis=1) - 1.0) > 1e-9):
        raise OutsideFacet("query point is not on the facet")
    if k == 0:
        return np.full(len(X), grid.values[0])
    idx, lam = _locate(k, grid.steps, X)
    return np.sum(grid.values[idx] * lam, axis=1)


def interpolate(grid: DensityGrid, x) -> float:
    return float(interpolate_many(grid, _facet_coords(grid, x)[None, :])[0])


def grid_integral(grid: DensityGrid) -> float:
    """Integral of the piecewise-affine interpolant over the facet's coordinate patch."""
    w = _node_weights(grid.facet_dim, grid.steps)
    return float(np.dot(w, grid.values))


def _evaluate(density: SimplexDensity, X: np.ndarray) -> np.ndarray:
    try:
        v = density(X)
    except Exception as exc:  # noqa: BLE001 - the callable is user code
        raise EvalFailure(f"density callable raised {type(exc).__name__}: {exc}") from exc
    on_boundary = np.any(X <= 0.0, axis=1)
    bad = ~np.isfinite(v)
    if np.any(bad & ~on_boundary):
        raise EvalFailure("density is not finite at an interior point")
    if np.any(v[~bad] < 0):
        raise EvalFailure("density returned a negative value")
    v = np.where(bad, 0.0, v)
    return v


def marginalize(
    density: SimplexDensity,
    facet: int,
    depth: int,
    accuracy: int,
    mode: str = PUSHFORWARD,
) -> DensityGrid:
    """Marginal of ``density`` on the facet opposite the vertex labelled ``facet``."""
    depth = _check_depth(depth)
    if mode not in MODES:
        raise ValidationError(f"unknown mode {mode!r}; expected one of {MODES}")
    M = int(accuracy)
    if M < 2:
        raise AccuracyTooLow(f"accuracy M must be at least 2, got {accuracy}")
    if mode == PUSHFORWARD and M < 3:
        raise AccuracyTooLow("pushforward needs M >= 3: with both endpoints zeroed M=2 samples nothing")
    labels = density.labels
    J = len(labels)
    if J < 3:
        raise FacetTooSmall(f"a {J - 1}-simplex has no facet to marginalize onto")
    if facet not in labels:
        raise IndexAbsent(f"facet {facet} not among labels {labels}")

    # columns of the density follow `labels`; facet nodes use ascending label order
    jpos = labels.index(facet)
    keep_sorted = sorted(k for k in labels if k != facet)
    cols = [labels.index(k) for k in keep_sorted]
    k = J - 2
    N = 2**depth
    Y = _lattice(k, N) / N
    n = len(Y)
    full = np.zeros((n, J))
    full[:, cols] = Y
    vertex = np.zeros(J)
    vertex[jpos] = 1.0

    # x_1 = z (t = 1) ... x_M = v (t = 0); endpoints carry zero weight
    t = 1.0 - np.arange(1, M - 1) / (M - 1)
    if mode == LINE_INTEGRAL:
        seg = np.linalg.norm(full - vertex, axis=1) / math.sqrt(2.0)
        weights = np.ones_like(t)
    else:
        weights = t**k / (M - 1)

    values = np.empty(n)
    chunk = max(1, _CHUNK_EVALS // max(1, len(t) * J))
    for start in range(0, n, chunk):
        Z = full[start:start + chunk]
        X = t[None, :, None] * Z[:, None, :] + (1.0 - t)[None, :, None] * vertex
        v = _evaluate(density, X.reshape(-1, J)).reshape(len(Z), len(t))
        values[start:start + chunk] = v @ weights
    if mode == LINE_INTEGRAL:
        values *= seg / M
    grid = DensityGrid(labels, facet, depth, Y, values, mode)
    if mode == PUSHFORWARD:
        total = grid_integral(grid)
        if not total > 0:
            raise EvalFailure("marginal integrates to zero; cannot normalize")
        grid = DensityGrid(labels, facet, depth, Y, values / total, mode)
    return grid


def marginalize_all(density: SimplexDensity, depth: int, accuracy: int, mode: str = PUSHFORWARD) -> dict[int, DensityGrid]:
    return {j: marginalize(density, j, depth, accuracy, mode) for j in density.labels}


def grid_density(grid: DensityGrid) -> SimplexDensity:
    """The grid's interpolant as a density on its facet."""
    labels = grid.facet_labels
    return SimplexDensity(len(labels), lambda X: interpolate_many(grid, X), labels=labels)


def recursive_marginalize(
    grid: DensityGrid,
    sub_facet: int,
    depth: int,
    accuracy: int,
    mode: str = PUSHFORWARD,
) -> DensityGrid:
    """Marginalize an already approximated facet density one level further."""
    if grid.facet_dim < 2:
        raise FacetTooSmall("an edge grid cannot be marginalized further")
    if sub_facet not in grid.facet_labels:
        raise IndexAbsent(f"label {sub_facet} is not on the grid's facet {grid.facet_labels}")
    return marginalize(grid_density(grid), sub_facet, depth, accuracy, mode)


def analytic_marginal_values(params: DirichletParams, grid: DensityGrid) -> np.ndarray:
    """Exact Dirichlet marginal on the grid's facet at every node (inf/0 allowed on the boundary)."""
    marg = dirichlet_marginal(params, grid.facet_labels)
    return np.exp(dirichlet_logpdf_array(marg, grid.nodes))


def dirichlet_validation_report(alpha: Sequence[float], depth: int, accuracy: int) -> dict:
    """Numeric versus analytic marginals on every facet, for both modes.

    Errors are max absolute differences over interior nodes.
    """
    params = DirichletParams(tuple(alpha))
    density = dirichlet_density(params)
    report = {"alpha": list(params.alpha), "depth": depth, "accuracy": accuracy, "facets": []}
    for j in range(1, params.dim + 1):
        entry = {"facet": j, "labels": [k for k in range(1, params.dim + 1) if k != j]}
        entry["analytic"] = list(dirichlet_marginal(params, entry["labels"]).alpha)
        for mode in MODES:
            grid = marginalize(density, j, depth, accuracy, mode)
            interior = ~grid.boundary
            exact = analytic_marginal_values(params, grid)[interior]
            err = np.abs(grid.values[interior] - exact)
            entry[mode] = {
                "max_abs_error": float(err.max()),
                "max_rel_error": float((err / np.maximum(exact, 1e-300)).max()),
                "integral": grid_integral(grid),
            }
        report["facets"].append(entry)
    return report


# ---------------------------------------------------------------------------
# serialization


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def grid_to_json(grid: DensityGrid) -> str:
    """Serialize with every real printed to 17 significant digits."""
    nodes = ",".join("[" + ",".join(_fmt(v) for v in row) + "]" for row in grid.nodes)
    values = ",".join(_fmt(v) for v in grid.values)
    return (
        "{"
        f'"dim":{grid.dim},'
        f'"labels":{json.dumps(list(grid.labels))},'
        f'"facet":{grid.facet},'
        f'"depth":{grid.depth},'
        f'"mode":{json.dumps(grid.mode)},'
        f'"nodes":[{nodes}],'
        f'"values":[{values}]'
        "}"
    )


def grid_from_dict(doc: dict) -> DensityGrid:
    try:
        dim = int(doc["dim"])
        labels = tuple(doc.get("labels") or range(1, dim + 1))
        if len(labels) != dim:
            raise ValidationError(f"'labels' has {len(labels)} entries but dim is {dim}")
        return DensityGrid(
            labels=labels,
            facet=int(doc["facet"]),
            depth=int(doc["depth"]),
            nodes=np.asarray(doc["nodes"], dtype=float),
            values=np.asarray(doc["values"], dtype=float),
            mode=str(doc["mode"]),
        )
    except KeyError as exc:
        raise ValidationError(f"grid document lacks field {exc}") from exc


def grid_from_json(text: str) -> DensityGrid:
    return grid_from_dict(json.loads(text))
