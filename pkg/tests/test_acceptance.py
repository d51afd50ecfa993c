"""Acceptance criteria, one test each, at their stated tolerances and time limits.

Every test records a one-line verdict; the lines are printed in the pytest
terminal summary, or directly when this file is run as a script.
"""

import time

import numpy as np
import pytest

from gpme import checks
from gpme.functions import NodeFunction, bracket_plus
from gpme.graph import Graph
from gpme.laplacian import LaplacianContext, apply_L
from gpme.nonlinearity import power_law

RESULTS = []

SEED = 20240611


def _report(num, title, ok, elapsed, limit, detail):
    in_time = elapsed < limit
    verdict = "PASS" if ok and in_time else "FAIL"
    RESULTS.append(f"[{verdict}] {num:>2}. {title}: {detail}; {elapsed:.3f}s (limit {limit:g}s)")
    assert ok, detail
    assert in_time, f"took {elapsed:.3f}s, limit {limit}s"


def _suite(num, title, fn, cases, limit, **kw):
    t0 = time.perf_counter()
    res = fn(SEED + num, cases, **kw)
    elapsed = time.perf_counter() - t0
    _report(num, title, res.ok, elapsed, limit,
            f"{res.passed}/{res.passed + res.failed} cases, worst margin {res.worst:.2e}")
    return res


def test_01_minus_thirteen():
    G = Graph(["x1", "x2", "x3", "x4"], [("x1", "x2", 1), ("x2", "x3", 1), ("x3", "x4", 1)])
    nl = power_law(4)
    u = NodeFunction({"x1": 3, "x2": 4}, G)
    v = NodeFunction({"x2": 3}, G)
    ctx = LaplacianContext(G)
    apply_L(ctx, nl, u)  # warm up
    t0 = time.perf_counter()
    val = bracket_plus(apply_L(ctx, nl, u) - apply_L(ctx, nl, v), u - v, p=2)
    elapsed = time.perf_counter() - t0
    _report(1, "l2 bracket on the 4-node path", abs(val + 13) <= 1e-9, elapsed, 1e-3,
            f"value {val!r}, expected -13")


def test_02_accretivity():
    _suite(2, "l1 accretivity", checks.accretivity_suite, 1000, 10)


def test_03_contractivity():
    _suite(3, "resolvent contractivity", checks.contractivity_suite, 500, 30)


def test_04_positivity():
    _suite(4, "sign preservation and strict positivity", checks.positivity_suite, 200, 10)


def test_05_comparison():
    _suite(5, "comparison principle", checks.comparison_suite, 200, 10)


def test_06_exhaustion():
    t0 = time.perf_counter()
    rep = checks.exhaustion_monotonicity(m=2.0, lam=1.0, levels=range(2, 21))
    elapsed = time.perf_counter() - t0
    _report(6, "exhaustion monotonicity on the half-line", rep["monotone"] and rep["shrinking"],
            elapsed, 5, f"max decrease {rep['worst_decrease']:.2e}, "
            f"||u20-u19|| = {rep['last_difference']:.2e} < ||u3-u2|| = {rep['first_difference']:.2e}")


def test_07_heat_consistency():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 7)
    ratios = []
    for _ in range(20):
        G = checks.random_graph(rng, 50, n_min=2)
        u0 = checks.random_function(rng, G)
        e1, e2 = checks.heat_errors(G, u0, 0.05)
        if e2 > 0:
            ratios.append(e1 / e2)
    elapsed = time.perf_counter() - t0
    ok = bool(ratios) and all(1.6 <= r <= 2.4 for r in ratios)
    _report(7, "heat consistency against expm", ok, elapsed, 30,
            f"E(eps)/E(eps/2) in [{min(ratios):.3f}, {max(ratios):.3f}] over {len(ratios)} graphs")


def test_08_mass():
    _suite(8, "mass conservation", checks.mass_suite, 100, 30)


def test_09_contraction():
    _suite(9, "contraction estimate", checks.contraction_suite, 100, 60)


def test_10_dirichlet():
    _suite(10, "Dirichlet commutation", checks.dirichlet_suite, 200, 5)


def test_11_bracket_limit():
    _suite(11, "bracket limit consistency", checks.bracket_suite, 200, 5)


if __name__ == "__main__":
    import sys
    failed = 0
    for name, fn in sorted((k, v) for k, v in globals().items() if k.startswith("test_")):
        try:
            fn()
        except AssertionError:
            failed += 1
        print(RESULTS[-1])
    sys.exit(1 if failed else 0)
