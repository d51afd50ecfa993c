"""Exhaustion of the half-line by balls: print u_n(0), ||u_n - u_{n-1}||_1 and the support size."""

import argparse
from dataclasses import dataclass

from gpme.families import half_line
from gpme.functions import NodeFunction, norm
from gpme.nonlinearity import power_law
from gpme.resolvent import ResolventProblem, exhaustion_levels


@dataclass
class Config:
    m: float = 2.0
    lam: float = 1.0
    levels: int = 20
    mass: float = 1.0


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=float, default=Config.m)
    ap.add_argument("--lam", type=float, default=Config.lam)
    ap.add_argument("--levels", type=int, default=Config.levels)
    ap.add_argument("--mass", type=float, default=Config.mass)
    cfg = Config(**vars(ap.parse_args()))

    H = half_line()
    g = NodeFunction({"0": cfg.mass}, H)
    prev = None
    print(f"{'n':>3} {'u_n(0)':>14} {'diff_l1':>12} {'#u>1e-12':>9}")
    for n, X, sol in exhaustion_levels(ResolventProblem(H, power_law(cfg.m), cfg.lam, g), cfg.levels):
        diff = norm(sol.u - prev, 1) if prev is not None else float("nan")
        big = sum(1 for x in X if sol.u(x) > 1e-12)
        print(f"{n:>3} {sol.u('0'):>14.10f} {diff:>12.3e} {big:>9}")
        prev = sol.u


if __name__ == "__main__":
    main()
