"""Evaluate the l2 and l1 brackets of L u - L v against u - v on the 4-node path.

For phi(s) = s|s|^3 the l2 bracket is negative (-13), so L is not l2-accretive,
while the l1 accretivity residual stays nonnegative for every lambda tried.
"""

import argparse
from dataclasses import dataclass

from gpme.functions import NodeFunction, bracket_plus
from gpme.graph import Graph
from gpme.laplacian import LaplacianContext, accretivity_residual, apply_L
from gpme.nonlinearity import power_law


@dataclass
class Config:
    m: float = 4.0
    u: tuple = (3, 4, 0, 0)
    v: tuple = (0, 3, 0, 0)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=float, default=Config.m)
    cfg = Config(m=ap.parse_args().m)

    nodes = ["x1", "x2", "x3", "x4"]
    G = Graph(nodes, list(zip(nodes, nodes[1:], [1.0] * 3)))
    nl = power_law(cfg.m)
    u = NodeFunction(dict(zip(nodes, cfg.u)), G)
    v = NodeFunction(dict(zip(nodes, cfg.v)), G)
    ctx = LaplacianContext(G)
    z = apply_L(ctx, nl, u) - apply_L(ctx, nl, v)
    k = u - v
    print("L u - L v =", [z(x) for x in nodes])
    print("u - v     =", [k(x) for x in nodes])
    print(f"l2 bracket = {bracket_plus(z, k, p=2):g}")
    print(f"l1 bracket = {bracket_plus(z, k, p=1):g}")
    for lam in (1e-5, 1e-3, 1e-1, 1.0, 10.0):
        print(f"lambda = {lam:g}: l1 residual {accretivity_residual(ctx, nl, u, v, lam):.6g}, "
              f"l2 residual {accretivity_residual(ctx, nl, u, v, lam, p=2):.6g}")


if __name__ == "__main__":
    main()
