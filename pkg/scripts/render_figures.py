"""Write the example figures: ternary scatter, projection net, density net, edge curves.

    python scripts/render_figures.py --out figures/
"""

import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from simplex_projection import BarycentricPoint, FigureSpec, Style, render
from simplex_projection.density import (
    DirichletParams,
    analytic_marginal_values,
    dirichlet_density,
    marginalize,
    recursive_marginalize,
)


@dataclass
class Config:
    seed: int = 7
    n_points: int = 40
    alpha3: tuple = (2.0, 5.0, 3.0)
    alpha4: tuple = (2.0, 5.0, 3.0, 4.0)
    depth: int = 7
    accuracy: int = 300
    cells_per_edge: int = 48


def figures(cfg: Config):
    rng = np.random.default_rng(cfg.seed)
    X3 = rng.dirichlet(cfg.alpha3, cfg.n_points)
    X4 = rng.dirichlet(cfg.alpha4, 3)
    pts3 = tuple(BarycentricPoint(tuple(x / x.sum())) for x in X3)
    pts4 = tuple(BarycentricPoint(tuple(x / x.sum())) for x in X4)
    yield "ternary_scatter.svg", FigureSpec("ternary_scatter", pts3, title="Dir(2,5,3) sample")
    yield "net_scatter.svg", FigureSpec("net_scatter", pts4, title="facet projections of three points")

    p3 = DirichletParams(cfg.alpha3)
    edges = tuple(marginalize(dirichlet_density(p3), j, cfg.depth, cfg.accuracy) for j in (1, 2, 3))
    exact = tuple(
        type(g)(g.labels, g.facet, g.depth, g.nodes,
                np.nan_to_num(analytic_marginal_values(p3, g), posinf=0.0), g.mode)
        for g in edges
    )
    yield "edge_curves.svg", FigureSpec("edge_curves", edges, overlay=exact, title="edge marginals")

    d4 = dirichlet_density(DirichletParams(cfg.alpha4))
    faces = tuple(marginalize(d4, j, cfg.depth, cfg.accuracy) for j in (1, 2, 3, 4))
    rec = tuple(recursive_marginalize(faces[3], k, cfg.depth, cfg.accuracy) for k in (1, 2, 3))
    style = Style(cells_per_edge=cfg.cells_per_edge)
    yield "net_density.svg", FigureSpec("net_density", faces + rec, style=style, title="facet marginals")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("figures"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, spec in figures(Config()):
        (args.out / name).write_bytes(render(spec))
        print(args.out / name)


if __name__ == "__main__":
    main()
