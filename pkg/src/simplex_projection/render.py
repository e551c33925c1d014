"""Byte-deterministic SVG figures of triangles and unfolded tetrahedron nets.

Kinds:

* ``ternary_scatter`` -- J=3 points in an equilateral triangle.
* ``net_scatter`` -- every facet projection of J=4 points on the unfolded net.
* ``net_density`` -- facet grids as heatmaps on the net; edge grids, if given,
  are drawn as colour strips along every copy of their edge.
* ``edge_curves`` -- J=3 edge marginals plotted orthogonally outward from the
  triangle, with optional reference curves.

Coordinates are printed with six decimals and elements are emitted in a
fixed order, so identical specs give identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _palettes
from .density import DensityGrid, _cells, _lattice, interpolate_many
from .errors import InconsistentSpec, UnsupportedDimensionForRendering
from .geometry import BarycentricPoint, CartesianPoint2D, FacetProjection, embed_regular_simplex, to_cartesian
from .projection import ProjectionBundle, project_all

KINDS = ("ternary_scatter", "net_scatter", "net_density", "edge_curves")
PALETTES = {"viridis": _palettes.VIRIDIS, "plasma": _palettes.PLASMA}
FONT = "DejaVu Sans, Arial, Helvetica, sans-serif"

UnsupportedDimension = UnsupportedDimensionForRendering


@dataclass(frozen=True)
class Style:
    width: int = 640
    height: int = 640
    point_radius: float = 3.0
    palette: str = "viridis"
    edge_palette: str = "plasma"
    margin: float = 40.0
    cells_per_edge: int = 32
    curve_height: float = 60.0
    seed: int = 0


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    content: tuple = ()
    overlay: tuple = ()
    style: Style = field(default_factory=Style)
    title: str = ""


# ---------------------------------------------------------------------------
# colours


def _hex_to_rgb(h: str) -> tuple[int, int, int]:
    return int(h[1:3], 16), int(h[3:5], 16), int(h[5:7], 16)


def palette_color(name: str, value: float) -> str:
    """Colour for ``value`` in [0, 1], interpolating linearly between the 256 entries."""
    try:
        table = PALETTES[name]
    except KeyError:
        raise InconsistentSpec(f"unknown palette {name!r}; expected one of {sorted(PALETTES)}") from None
    v = min(max(float(value), 0.0), 1.0) * (len(table) - 1)
    i = min(int(math.floor(v)), len(table) - 2)
    frac = v - i
    lo, hi = _hex_to_rgb(table[i]), _hex_to_rgb(table[i + 1])
    rgb = tuple(int(round(a + (b - a) * frac)) for a, b in zip(lo, hi))
    return "#%02x%02x%02x" % rgb


# ---------------------------------------------------------------------------
# layout


def layout_net(J: int = 4) -> dict[int, tuple[tuple[int, CartesianPoint2D], ...]]:
    """The tetrahedron net in unit coordinates, keyed by the dropped vertex.

    The facet opposite v4 sits in the middle; the other three are folded out
    across its edges, so v4 shows up three times.
    """
    if J != 4:
        raise UnsupportedDimension(f"nets are drawn for J=4 only, got J={J}")
    return embed_regular_simplex(4)


class Canvas:
    """Affine map from unit coordinates to pixels (y pointing down)."""

    def __init__(self, points: Sequence[CartesianPoint2D], width: float, height: float, margin: float):
        xs = [p.x for p in points]
        ys = [p.y for p in points]
        self.xmin, self.ymax = min(xs), max(ys)
        bw, bh = max(xs) - self.xmin, self.ymax - min(ys)
        self.scale = min((width - 2 * margin) / bw, (height - 2 * margin) / bh)
        self.ox = (width - self.scale * bw) / 2.0
        self.oy = (height - self.scale * bh) / 2.0

    def __call__(self, p: CartesianPoint2D) -> tuple[float, float]:
        return self.ox + self.scale * (p.x - self.xmin), self.oy + self.scale * (self.ymax - p.y)


def _f(v: float) -> str:
    s = f"{v:.6f}"
    return "0.000000" if s == "-0.000000" else s


def _pts(coords) -> str:
    return " ".join(f"{_f(x)},{_f(y)}" for x, y in coords)


def _text(x, y, s, size=14, anchor="middle", cls="label"):
    return (
        f'<text class="{cls}" x="{_f(x)}" y="{_f(y)}" font-family="{FONT}" '
        f'font-size="{size}" text-anchor="{anchor}">{s}</text>'
    )


def _triangles_for(J):
    if J == 3:
        v = embed_regular_simplex(3)
        return {0: tuple(zip((1, 2, 3), v))}
    return layout_net(J)


def _outline(canvas, tri):
    pts = [canvas(v) for _, v in tri]
    return f'<polygon class="facet" points="{_pts(pts)}" fill="none" stroke="#333333" stroke-width="1.2"/>'


def _vertex_labels(canvas, triangles):
    seen = set()
    out = []
    centre = CartesianPoint2D(
        sum(v.x for tri in triangles.values() for _, v in tri) / (3 * len(triangles)),
        sum(v.y for tri in triangles.values() for _, v in tri) / (3 * len(triangles)),
    )
    for key in sorted(triangles):
        for label, v in triangles[key]:
            pos = (round(v.x, 9), round(v.y, 9))
            if pos in seen:
                continue
            seen.add(pos)
            dx, dy = v.x - centre.x, v.y - centre.y
            norm = math.hypot(dx, dy) or 1.0
            x, y = canvas(CartesianPoint2D(v.x + 0.06 * dx / norm, v.y + 0.06 * dy / norm))
            out.append(_text(x, y + 5, f"v{label}"))
    return out


def _facet_point(weights, labels, tri) -> CartesianPoint2D:
    where = dict(tri)
    return to_cartesian(weights, [where[k] for k in labels])


def _marker(canvas, p, r, cls):
    x, y = canvas(p)
    return f'<circle class="{cls}" cx="{_f(x)}" cy="{_f(y)}" r="{_f(r)}" fill="#1f1f1f" fill-opacity="0.8"/>'


def _scale_note(x, y, name, lo, hi):
    return _text(x, y, f"{name}: {lo:.4g} .. {hi:.4g}", size=11, anchor="start", cls="scale")


# ---------------------------------------------------------------------------
# figure bodies


def _check_style(style: Style):
    for name in ("width", "height", "point_radius", "margin", "cells_per_edge", "curve_height"):
        if not getattr(style, name) > 0:
            raise InconsistentSpec(f"style.{name} must be positive")
    for name in (style.palette, style.edge_palette):
        if name not in PALETTES:
            raise InconsistentSpec(f"unknown palette {name!r}; expected one of {sorted(PALETTES)}")


def _ternary_scatter(spec, canvas, triangles):
    tri = triangles[0]
    out = []
    for p in spec.content:
        if not isinstance(p, BarycentricPoint) or p.dim != 3:
            raise InconsistentSpec("ternary_scatter takes J=3 BarycentricPoints")
        out.append(_marker(canvas, _facet_point(p.weights, (1, 2, 3), tri), spec.style.point_radius, "marker"))
    return sorted(out)


def _net_scatter(spec, canvas, triangles):
    out = []
    for item in spec.content:
        if isinstance(item, BarycentricPoint):
            if item.dim != 4:
                raise InconsistentSpec("net_scatter takes J=4 points or bundles")
            item = project_all(item)
        if isinstance(item, FacetProjection):
            projs = (item,)
        elif isinstance(item, ProjectionBundle):
            projs = item.projections
        else:
            raise InconsistentSpec(f"net_scatter cannot draw {type(item).__name__}")
        for proj in projs:
            if proj.dim != 4:
                raise InconsistentSpec("net_scatter takes J=4 projections")
            p = _facet_point(proj.weights, proj.labels, triangles[proj.dropped])
            out.append(_marker(canvas, p, spec.style.point_radius, f"marker facet-{proj.dropped}"))
    return sorted(out)


def _grid_values_on_cells(grid, n):
    """Interpolated value at the centroid of each display cell of a triangle grid."""
    nodes = _lattice(2, n) / n
    cells = _cells(2, n)
    centroids = nodes[cells].mean(axis=1)
    return nodes, cells, interpolate_many(grid, centroids)


def _edge_occurrences(triangles, a, b):
    seen = set()
    out = []
    for key in sorted(triangles):
        where = dict(triangles[key])
        if a in where and b in where:
            pa, pb = where[a], where[b]
            sig = tuple(sorted([(round(pa.x, 9), round(pa.y, 9)), (round(pb.x, 9), round(pb.y, 9))]))
            if sig not in seen:
                seen.add(sig)
                out.append((pa, pb))
    return out


def _net_density(spec, canvas, triangles):
    style = spec.style
    faces, edges = [], []
    for g in spec.content:
        if not isinstance(g, DensityGrid):
            raise InconsistentSpec("net_density takes DensityGrids")
        if g.facet_dim == 2 and g.dim == 4:
            faces.append(g)
        elif g.facet_dim == 1:
            edges.append(g)
        else:
            raise InconsistentSpec(f"cannot place a grid on labels {g.facet_labels} in a tetrahedron net")
    if not faces and not edges:
        raise InconsistentSpec("net_density needs at least one grid")

    out = []
    n = style.cells_per_edge
    face_data = []
    for g in sorted(faces, key=lambda g: g.facet):
        face_data.append((g, *_grid_values_on_cells(g, n)))
    if face_data:
        allv = np.concatenate([d[3] for d in face_data])
        lo, hi = float(allv.min()), float(allv.max())
        span = hi - lo if hi > lo else 1.0
        for g, nodes, cells, vals in face_data:
            tri = triangles[g.facet]
            corners = [canvas(_facet_point(w, g.facet_labels, tri)) for w in nodes]
            for cell, v in zip(cells, vals):
                colour = palette_color(style.palette, (v - lo) / span)
                pts = [corners[i] for i in cell]
                out.append(
                    f'<polygon class="cell facet-{g.facet}" points="{_pts(pts)}" '
                    f'fill="{colour}" stroke="{colour}" stroke-width="0.3"/>'
                )
        out.append(_scale_note(8, style.height - 24, style.palette, lo, hi))

    if edges:
        allv = np.concatenate([g.values for g in edges])
        lo, hi = float(allv.min()), float(allv.max())
        span = hi - lo if hi > lo else 1.0
        for g in sorted(edges, key=lambda g: g.facet_labels):
            a, b = g.facet_labels
            if not {a, b} <= {1, 2, 3, 4}:
                raise InconsistentSpec(f"edge grid labels {g.facet_labels} outside 1..4")
            for pa, pb in _edge_occurrences(triangles, a, b):
                ya = g.nodes[:, 0]
                pos = [canvas(CartesianPoint2D(w * pa.x + (1 - w) * pb.x, w * pa.y + (1 - w) * pb.y)) for w in ya]
                for i in range(len(pos) - 1):
                    v = 0.5 * (g.values[i] + g.values[i + 1])
                    colour = palette_color(style.edge_palette, (v - lo) / span)
                    out.append(
                        f'<line class="strip edge-{a}{b}" x1="{_f(pos[i][0])}" y1="{_f(pos[i][1])}" '
                        f'x2="{_f(pos[i + 1][0])}" y2="{_f(pos[i + 1][1])}" stroke="{colour}" stroke-width="5"/>'
                    )
        out.append(_scale_note(8, style.height - 8, style.edge_palette, lo, hi))
    return out


def _edge_curves(spec, canvas, triangles):
    style = spec.style
    tri = dict(triangles[0])
    grids = list(spec.content) + list(spec.overlay)
    for g in grids:
        if not isinstance(g, DensityGrid) or g.facet_dim != 1 or not set(g.labels) <= {1, 2, 3}:
            raise InconsistentSpec("edge_curves takes edge grids of a J=3 simplex")
    finite = np.concatenate([g.values[np.isfinite(g.values)] for g in grids])
    vmax = float(finite.max()) if finite.size and finite.max() > 0 else 1.0
    centre = CartesianPoint2D(sum(v.x for v in tri.values()) / 3, sum(v.y for v in tri.values()) / 3)

    def curve(g, cls, stroke, dash):
        a, b = g.facet_labels
        pa, pb = tri[a], tri[b]
        ex, ey = pb.x - pa.x, pb.y - pa.y
        nx, ny = ey, -ex
        mx, my = (pa.x + pb.x) / 2 - centre.x, (pa.y + pb.y) / 2 - centre.y
        if nx * mx + ny * my < 0:
            nx, ny = -nx, -ny
        norm = math.hypot(nx, ny)
        nx, ny = nx / norm, ny / norm
        pts = []
        for w, v in zip(g.nodes[:, 0], g.values):
            if not math.isfinite(v):
                continue
            x, y = canvas(CartesianPoint2D(w * pa.x + (1 - w) * pb.x, w * pa.y + (1 - w) * pb.y))
            h = style.curve_height * v / vmax
            pts.append((x + nx * h, y - ny * h))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        return (
            f'<polyline class="{cls} edge-{a}{b}" points="{_pts(pts)}" fill="none" '
            f'stroke="{stroke}" stroke-width="1.6"{dash_attr}/>'
        )

    out = [curve(g, "reference", "#7b3294", "") for g in sorted(spec.overlay, key=lambda g: g.facet_labels)]
    out += [curve(g, "approx", "#1b9e77", "6,4") for g in sorted(spec.content, key=lambda g: g.facet_labels)]
    out.append(_scale_note(8, style.height - 8, "curve height", 0.0, vmax))
    return out


def _geometry_points(spec, triangles):
    pts = [v for tri in triangles.values() for _, v in tri]
    if spec.kind == "edge_curves":
        # leave room for the curves drawn outside the triangle
        c = CartesianPoint2D(0.5, math.sqrt(3) / 6)
        grow = 1.0 + 2.2 * spec.style.curve_height / max(spec.style.width, spec.style.height)
        pts = pts + [CartesianPoint2D(c.x + grow * (p.x - c.x), c.y + grow * (p.y - c.y)) for p in pts]
    return pts


def render(spec: FigureSpec) -> bytes:
    """SVG 1.1 document for ``spec`` as UTF-8 bytes."""
    if spec.kind not in KINDS:
        raise InconsistentSpec(f"unknown figure kind {spec.kind!r}; expected one of {KINDS}")
    _check_style(spec.style)
    J = 3 if spec.kind in ("ternary_scatter", "edge_curves") else 4
    triangles = _triangles_for(J)
    style = spec.style
    canvas = Canvas(_geometry_points(spec, triangles), style.width, style.height, style.margin)
    body = {
        "ternary_scatter": _ternary_scatter,
        "net_scatter": _net_scatter,
        "net_density": _net_density,
        "edge_curves": _edge_curves,
    }[spec.kind](spec, canvas, triangles)

    lines = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{style.width}" '
        f'height="{style.height}" viewBox="0 0 {style.width} {style.height}">',
        f'<rect x="0" y="0" width="{style.width}" height="{style.height}" fill="#ffffff"/>',
    ]
    if spec.title:
        lines.append(_text(style.width / 2, 20, _escape(spec.title), size=15))
    # heatmaps go under the outlines, markers and curves on top
    under = [e for e in body if e.startswith('<polygon class="cell')]
    over = [e for e in body if not e.startswith('<polygon class="cell')]
    lines += under
    lines += [_outline(canvas, triangles[k]) for k in sorted(triangles)]
    lines += over
    lines += _vertex_labels(canvas, triangles)
    lines.append("</svg>")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
