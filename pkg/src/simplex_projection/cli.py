"""Command-line front end.

Artifacts go to files (or stdout for reports when no ``--output`` is given);
diagnostics and machine-readable error documents go to stderr. Exit codes:
0 success, 2 validation failure, 3 infeasible matching, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .density import (
    LINE_INTEGRAL,
    MAX_DEPTH,
    PUSHFORWARD,
    DirichletParams,
    analytic_marginal_values,
    dirichlet_density,
    dirichlet_validation_report,
    grid_from_json,
    grid_to_json,
    marginalize,
    recursive_marginalize,
)
from .errors import MatchingError, ParseError, RowValidationError, SimplexError, ValidationError
from .geometry import POLICIES, STRICT, BarycentricPoint, FacetProjection, validate
from .matching import CYCLE_TOL, MATCH_COMPAT_TOL, UnlabeledFacetSets, match, project_set, reconstruct_set
from .projection import ProjectionBundle, reconstruct, reconstruct_from_two
from .render import KINDS, FigureSpec, Style, render

COMMANDS = ("project", "reconstruct", "match", "marginalize", "recursive", "render", "validate-dirichlet")
EXIT_OK, EXIT_VALIDATION, EXIT_MATCHING, EXIT_IO = 0, 2, 3, 4
MANIFEST = "manifest.json"


@dataclass
class RunConfig:
    command: str
    input: list[str] = field(default_factory=list)
    output: Optional[str] = None
    dim: Optional[int] = None
    depth: int = 10
    accuracy: int = 1000
    mode: str = PUSHFORWARD
    tol_cycle: float = CYCLE_TOL
    tol_compat: float = MATCH_COMPAT_TOL
    policy: str = STRICT
    seed: int = 0
    alpha: Optional[tuple[float, ...]] = None
    shuffle: bool = True
    facet: Optional[int] = None
    facets: Optional[tuple[int, int]] = None
    drop: Optional[int] = None
    kind: str = "net_scatter"
    width: int = 640
    height: int = 640

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        if not 1 <= self.depth <= MAX_DEPTH:
            raise ValidationError(f"--depth must lie in [1, {MAX_DEPTH}]")
        if self.accuracy < 2:
            raise ValidationError("--accuracy must be at least 2")
        if not (self.tol_cycle > 0 and self.tol_compat > 0):
            raise ValidationError("tolerances must be positive")
        if self.policy not in POLICIES:
            raise ValidationError(f"--policy must be one of {POLICIES}")


# ---------------------------------------------------------------------------
# io helpers


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _read_rows(path, header: bool = False):
    """Numeric rows of a CSV file.

    A non-numeric first line is skipped as a header; with ``header=True`` the
    first line is skipped whatever it holds (projection files label their
    columns with numbers).
    """
    with open(path, newline="") as fh:
        raw = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if header and raw:
        raw = raw[1:]
        first = 2
    else:
        first = 1
    if not raw:
        raise ParseError(f"{path}: no data rows", row=None, column=None)
    rows = []
    for r, row in enumerate(raw, start=first):
        values = []
        for c, cell in enumerate(row, start=1):
            try:
                values.append(float(cell))
            except ValueError:
                if r == 1 and not header:
                    values = None
                    break
                raise ParseError(f"{path}: row {r}, column {c}: cannot parse {cell!r}", row=r, column=c) from None
        if values is None:
            continue
        if rows and len(values) != len(rows[0][1]):
            raise ParseError(
                f"{path}: row {r} has {len(values)} columns, expected {len(rows[0][1])}", row=r, column=len(values)
            )
        rows.append((r, values))
    if not rows:
        raise ParseError(f"{path}: header only, no data rows", row=1, column=None)
    return rows


def ingest_csv(path, policy: str = STRICT) -> list[BarycentricPoint]:
    """Read one composition per row; an optional non-numeric header line is skipped."""
    points = []
    for r, values in _read_rows(path):
        try:
            points.append(validate(values, policy))
        except ValidationError as exc:
            raise RowValidationError(f"{path}: row {r}: {exc}", row=r, reason=str(exc)) from exc
    print(f"read {len(points)} rows x {points[0].dim} columns from {path}", file=sys.stderr)
    return points


def write_points(path, points: Sequence[BarycentricPoint]):
    J = points[0].dim
    with open(path, "w", newline="") as fh:
        fh.write(",".join(f"pi{k}" for k in range(1, J + 1)) + "\n")
        for p in points:
            fh.write(",".join(_fmt(v) for v in p.weights) + "\n")


def write_projection_dir(outdir, u: UnlabeledFacetSets, shuffled: bool, seed: int):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = {}
    for j in range(1, u.dim + 1):
        name = f"facet_{j}.csv"
        files[str(j)] = name
        projs = u.facet(j)
        with open(outdir / name, "w", newline="") as fh:
            fh.write(",".join(str(k) for k in projs[0].labels) + "\n")
            for p in projs:
                fh.write(",".join(_fmt(v) for v in p.weights) + "\n")
    manifest = {"dim": u.dim, "count": u.L, "shuffled": shuffled, "seed": seed if shuffled else None, "facets": files}
    (outdir / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def read_projection_dir(indir):
    indir = Path(indir)
    manifest = json.loads((indir / MANIFEST).read_text())
    J = int(manifest["dim"])
    per_facet = []
    for j in range(1, J + 1):
        path = indir / manifest["facets"][str(j)]
        with open(path, newline="") as fh:
            head = next(csv.reader(fh), [])
        expected = [str(k) for k in range(1, J + 1) if k != j]
        if [c.strip() for c in head] != expected:
            raise ParseError(f"{path}: header {head} does not name labels {expected}", row=1, column=None)
        projs = []
        for r, values in _read_rows(path, header=True):
            try:
                projs.append(FacetProjection(j, values))
            except ValidationError as exc:
                raise RowValidationError(f"facet {j}, row {r}: {exc}", row=r, reason=str(exc)) from exc
        per_facet.append(tuple(projs))
    return manifest, UnlabeledFacetSets(tuple(per_facet))


def _write_text(path, text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _require(value, flag):
    if value is None or (isinstance(value, list) and not value):
        raise ValidationError(f"{flag} is required for this command")
    return value


# ---------------------------------------------------------------------------
# commands


def _cmd_project(cfg: RunConfig):
    points = ingest_csv(_require(cfg.input, "--input")[0], cfg.policy)
    u = project_set(points, seed=cfg.seed, shuffle=cfg.shuffle)
    write_projection_dir(_require(cfg.output, "--output"), u, cfg.shuffle, cfg.seed)


def _cmd_reconstruct(cfg: RunConfig):
    manifest, u = read_projection_dir(_require(cfg.input, "--input")[0])
    if manifest.get("shuffled"):
        raise ValidationError("projection labels were shuffled; use the 'match' command")
    points = []
    for l in range(u.L):
        if cfg.facets:
            n, m = cfg.facets
            points.append(reconstruct_from_two(u.facet(n)[l], u.facet(m)[l], cfg.tol_compat))
        else:
            bundle = ProjectionBundle(tuple(u.facet(j)[l] for j in range(1, u.dim + 1)))
            points.append(reconstruct(bundle, cfg.tol_compat))
    write_points(_require(cfg.output, "--output"), points)


def _cmd_match(cfg: RunConfig):
    _, u = read_projection_dir(_require(cfg.input, "--input")[0])
    m = match(u, tol=cfg.tol_cycle, compat_tol=cfg.tol_compat)
    points = reconstruct_set(u, m, compat_tol=cfg.tol_compat)
    out = Path(_require(cfg.output, "--output"))
    write_points(out, points)
    report = {
        "dim": u.dim,
        "count": u.L,
        "tuples": [list(t) for t in m.tuples],
        "residuals": list(m.residuals),
        "max_residual": max(m.residuals),
        "notes": [str(n) for n in m.notes],
    }
    out.with_suffix(".report.json").write_text(json.dumps(report, indent=2) + "\n")
    print(f"matched {u.L} points, max cycle residual {report['max_residual']:.3e}", file=sys.stderr)


def _cmd_marginalize(cfg: RunConfig):
    params = DirichletParams(_require(cfg.alpha, "--alpha"))
    density = dirichlet_density(params)
    facets = [cfg.facet] if cfg.facet else list(range(1, params.dim + 1))
    grids = [marginalize(density, j, cfg.depth, cfg.accuracy, cfg.mode) for j in facets]
    text = grid_to_json(grids[0]) if cfg.facet else "[" + ",".join(grid_to_json(g) for g in grids) + "]"
    _write_text(cfg.output, text + "\n")


def _load_grids(paths):
    grids = []
    for path in paths:
        text = Path(path).read_text().strip()
        if text.startswith("["):
            grids += [grid_from_json(json.dumps(doc)) for doc in json.loads(text)]
        else:
            grids.append(grid_from_json(text))
    return grids


def _cmd_recursive(cfg: RunConfig):
    grids = _load_grids(_require(cfg.input, "--input"))
    if len(grids) != 1:
        raise ValidationError("recursive takes exactly one grid document")
    out = recursive_marginalize(grids[0], _require(cfg.drop, "--drop"), cfg.depth, cfg.accuracy, cfg.mode)
    _write_text(cfg.output, grid_to_json(out) + "\n")


def _cmd_render(cfg: RunConfig):
    style = Style(width=cfg.width, height=cfg.height)
    overlay = ()
    if cfg.kind in ("ternary_scatter", "net_scatter"):
        content = tuple(ingest_csv(_require(cfg.input, "--input")[0], cfg.policy))
    elif cfg.alpha is not None:
        params = DirichletParams(cfg.alpha)
        density = dirichlet_density(params)
        content = tuple(marginalize(density, j, cfg.depth, cfg.accuracy, cfg.mode) for j in range(1, params.dim + 1))
        if cfg.kind == "edge_curves":
            overlay = tuple(
                type(g)(g.labels, g.facet, g.depth, g.nodes, _finite(analytic_marginal_values(params, g)), g.mode)
                for g in content
            )
    else:
        content = tuple(_load_grids(_require(cfg.input, "--input")))
    svg = render(FigureSpec(cfg.kind, content, overlay, style))
    Path(_require(cfg.output, "--output")).write_bytes(svg)


def _finite(values):
    return np.where(np.isfinite(values), values, 0.0)


def _cmd_validate_dirichlet(cfg: RunConfig):
    report = dirichlet_validation_report(_require(cfg.alpha, "--alpha"), cfg.depth, cfg.accuracy)
    for entry in report["facets"]:
        print(
            f"facet {entry['facet']} Dir{tuple(entry['analytic'])}: "
            f"pushforward max|err| {entry[PUSHFORWARD]['max_abs_error']:.3e}, "
            f"line_integral max|err| {entry[LINE_INTEGRAL]['max_abs_error']:.3e}",
            file=sys.stderr,
        )
    _write_text(cfg.output, json.dumps(report, indent=2) + "\n")


HANDLERS = {
    "project": _cmd_project,
    "reconstruct": _cmd_reconstruct,
    "match": _cmd_match,
    "marginalize": _cmd_marginalize,
    "recursive": _cmd_recursive,
    "render": _cmd_render,
    "validate-dirichlet": _cmd_validate_dirichlet,
}


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit status."""
    try:
        HANDLERS[config.command](config)
    except MatchingError as exc:
        return _fail(exc, EXIT_MATCHING)
    except SimplexError as exc:
        return _fail(exc, EXIT_VALIDATION)
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        return _fail(exc, EXIT_IO)
    return EXIT_OK


def _fail(exc, code):
    doc = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    for attr in ("row", "column", "reason", "residual_sums"):
        if getattr(exc, attr, None) is not None:
            doc[attr] = getattr(exc, attr)
    print(json.dumps(doc, default=list), file=sys.stderr)
    return code


# ---------------------------------------------------------------------------
# argument parsing


def _floats(text):
    return tuple(float(v) for v in text.split(","))


def _pair(text):
    a, b = (int(v) for v in text.split(","))
    return a, b


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simplex-projection", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--input", nargs="+", default=[])
        p.add_argument("--output")
        p.add_argument("--dim", type=int)
        p.add_argument("--depth", type=int, default=10)
        p.add_argument("--accuracy", type=int, default=1000)
        p.add_argument("--mode", choices=["line-integral", "pushforward"], default="pushforward")
        p.add_argument("--tol-cycle", type=float, default=CYCLE_TOL)
        p.add_argument("--tol-compat", type=float, default=MATCH_COMPAT_TOL)
        p.add_argument("--policy", choices=list(POLICIES), default=STRICT)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--alpha", type=_floats)
        if name == "project":
            p.add_argument("--no-shuffle", dest="shuffle", action="store_false")
        if name == "reconstruct":
            p.add_argument("--facets", type=_pair, help="two facets n,m for two-facet reconstruction")
        if name == "marginalize":
            p.add_argument("--facet", type=int, help="dropped vertex; all facets when omitted")
        if name == "recursive":
            p.add_argument("--drop", type=int, required=True, help="label to marginalize out of the grid's facet")
        if name == "render":
            p.add_argument("--kind", choices=KINDS, required=True)
            p.add_argument("--width", type=int, default=640)
            p.add_argument("--height", type=int, default=640)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    kwargs = {k: v for k, v in vars(ns).items() if v is not None}
    kwargs["mode"] = LINE_INTEGRAL if ns.mode == "line-integral" else PUSHFORWARD
    kwargs["tol_cycle"] = ns.tol_cycle
    kwargs["tol_compat"] = ns.tol_compat
    return RunConfig(**kwargs)


def main(argv: Optional[Sequence[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except ValidationError as exc:
        return _fail(exc, EXIT_VALIDATION)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
