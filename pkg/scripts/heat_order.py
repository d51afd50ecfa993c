"""Observed order of implicit Euler for the heat equation on random graphs, against expm."""

import argparse
import math
from dataclasses import dataclass

import numpy as np

from gpme.checks import heat_errors, random_function, random_graph


@dataclass
class Config:
    seed: int = 0
    cases: int = 10
    eps: float = 0.05
    T: float = 1.0
    n_max: int = 50


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in vars(Config()).items():
        ap.add_argument(f"--{name}", type=type(default), default=default)
    cfg = Config(**vars(ap.parse_args()))

    rng = np.random.default_rng(cfg.seed)
    print(f"{'case':>4} {'|X|':>4} {'E(eps)':>11} {'E(eps/2)':>11} {'ratio':>7} {'order':>6}")
    for i in range(cfg.cases):
        G = random_graph(rng, cfg.n_max, n_min=2)
        u0 = random_function(rng, G)
        e1, e2 = heat_errors(G, u0, cfg.eps, cfg.T)
        ratio = e1 / e2 if e2 else float("nan")
        order = math.log2(ratio) if e2 else float("nan")
        print(f"{i:>4} {len(G):>4} {e1:>11.4e} {e2:>11.4e} {ratio:>7.3f} {order:>6.3f}")


if __name__ == "__main__":
    main()
