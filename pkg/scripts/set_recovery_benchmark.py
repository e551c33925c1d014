"""Time and accuracy of recovering shuffled point sets from their facet projections."""

import argparse
import time
from dataclasses import dataclass, field

import numpy as np

from simplex_projection import BarycentricPoint, match, project_set, reconstruct_set


@dataclass
class Config:
    dims: list = field(default_factory=lambda: [3, 4, 5])
    sizes: list = field(default_factory=lambda: [2, 5, 10, 15, 30])
    trials: int = 20
    seed: int = 0


def run(cfg: Config):
    rng = np.random.default_rng(cfg.seed)
    for J in cfg.dims:
        for L in cfg.sizes:
            worst, t0 = 0.0, time.perf_counter()
            for trial in range(cfg.trials):
                X = rng.dirichlet(np.ones(J), L)
                pts = [BarycentricPoint(tuple(x / x.sum())) for x in X]
                u = project_set(pts, seed=trial)
                got = np.array([p.weights for p in reconstruct_set(u, match(u))])
                ref = np.array([p.weights for p in pts])
                got, ref = got[np.lexsort(got.T[::-1])], ref[np.lexsort(ref.T[::-1])]
                worst = max(worst, float(np.max(np.abs(got - ref))))
            ms = 1e3 * (time.perf_counter() - t0) / cfg.trials
            print(f"J={J} L={L:3d}  {ms:8.2f} ms/trial  max err {worst:.1e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=Config.trials)
    ap.add_argument("--seed", type=int, default=Config.seed)
    a = ap.parse_args()
    run(Config(trials=a.trials, seed=a.seed))
