"""Mild-solution refinement for the PME on a path: differences between halvings of eps."""

import argparse
from dataclasses import dataclass

from gpme.evolution import Forcing, evolve_mild
from gpme.functions import NodeFunction
from gpme.graph import Graph
from gpme.nonlinearity import power_law


@dataclass
class Config:
    n: int = 20
    m: float = 2.0
    T: float = 1.0
    eps: float = 0.25
    tol: float = 1e-3


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in vars(Config()).items():
        ap.add_argument(f"--{name}", type=type(default), default=default)
    cfg = Config(**vars(ap.parse_args()))

    nodes = [str(i) for i in range(cfg.n)]
    G = Graph(nodes, [(a, b, 1.0) for a, b in zip(nodes, nodes[1:])])
    u0 = NodeFunction({"0": 1.0}, G)
    res = evolve_mild(G, power_law(cfg.m), u0, Forcing.zero(), cfg.T, cfg.eps, cfg.tol)
    eps = cfg.eps
    for d in res.delta_estimate:
        print(f"eps {eps:<10g} -> eps/2: sup_t ||u_eps - u_eps/2||_1 = {d:.4e}")
        eps /= 2
    front = max((int(x) for x in res.states[-1].support if res.states[-1](x) > 1e-6), default=0)
    print(f"u(T) above 1e-6 up to node {front}; mass {sum(res.states[-1].values()):.12f}")


if __name__ == "__main__":
    main()
