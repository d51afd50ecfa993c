"""Randomized invariant suites, shared by the ``check`` subcommand and the tests.

Every suite takes an explicit seed and a case count and returns a
:class:`SuiteResult`; identical arguments give identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .evolution import (EvolutionResult, Forcing, contraction_gap, discretization_on_grid, discretize,
                        evolve, run_discretization)
from .families import half_line
from .functions import NodeFunction, bracket_plus, norm
from .graph import Graph
from .laplacian import LaplacianContext, accretivity_residual, dirichlet_commutation_check
from .nonlinearity import power_law
from .oracle import assemble_dense, bracket_by_limit, expm_apply
from .resolvent import ResolventProblem, exhaustion_levels, solve_finite


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failed: int = 0
    worst: float = -math.inf
    failures: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def record(self, ok: bool, margin: float, info=None):
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if len(self.failures) < 10:
                self.failures.append(info)
        self.worst = max(self.worst, margin)

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        worst = "n/a" if self.worst == -math.inf else f"{self.worst:.3e}"
        return f"{self.name}: {status} passed={self.passed} failed={self.failed} worst_margin={worst}"


# -- random instances ---------------------------------------------------------

def random_graph(rng: np.random.Generator, n_max: int = 30, n_min: int = 1, connected: bool = False,
                 kappa: bool | None = None, p_edge: float | None = None) -> Graph:
    """Random weighted graph on n_min..n_max nodes.

    ``kappa=None`` draws a killing term on a random subset of nodes,
    ``False`` sets it to zero everywhere, ``True`` makes it positive everywhere.
    """
    n = int(rng.integers(n_min, n_max + 1))
    nodes = [f"n{i}" for i in range(n)]
    p = float(rng.uniform(0.05, 0.5)) if p_edge is None else p_edge
    pairs = set()
    if connected:
        for i in range(1, n):
            pairs.add((int(rng.integers(0, i)), i))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                pairs.add((i, j))
    edges = [(nodes[i], nodes[j], float(rng.uniform(0.1, 2.0))) for i, j in sorted(pairs)]
    mu = {x: float(rng.uniform(0.2, 3.0)) for x in nodes}
    if kappa is False:
        kap = {}
    elif kappa is True:
        kap = {x: float(rng.uniform(0.05, 1.0)) for x in nodes}
    else:
        kap = {x: float(rng.uniform(0.0, 1.0)) for x in nodes if rng.random() < 0.3}
    return Graph(nodes, edges, mu, kap)


def random_function(rng: np.random.Generator, G: Graph, density: float | None = None,
                    sign: int = 0, scale: float = 1.0) -> NodeFunction:
    """Random finitely supported function; ``sign`` = +1/-1 forces the sign."""
    dens = float(rng.uniform(0.2, 1.0)) if density is None else density
    vals = {}
    for x in G.nodes:
        if rng.random() < dens:
            a = float(rng.uniform(-scale, scale))
            vals[x] = abs(a) * sign if sign else a
    return NodeFunction(vals, G)


# -- suites ---------------------------------------------------------------------

ACCRETIVITY_LAMBDAS = (1e-3, 1.0, 1e3)
ACCRETIVITY_M = (0.5, 1.0, 2.0, 4.0)


def accretivity_suite(seed: int, cases: int, n_max: int = 30) -> SuiteResult:
    """l1 accretivity of L = Delta Phi on random finite graphs."""
    rng = np.random.default_rng(seed)
    out = SuiteResult("accretivity")
    for _ in range(cases):
        G = random_graph(rng, n_max)
        nl = power_law(ACCRETIVITY_M[int(rng.integers(len(ACCRETIVITY_M)))])
        u = random_function(rng, G)
        # share some entries so that u - v has a nontrivial zero set
        v = NodeFunction({x: (u(x) if rng.random() < 0.3 else float(rng.uniform(-1, 1)))
                          for x in G.nodes}, G)
        ctx = LaplacianContext(G)
        bound = -1e-10 * (1 + norm(u - v, 1))
        res = {lam: accretivity_residual(ctx, nl, u, v, lam) for lam in ACCRETIVITY_LAMBDAS}
        worst = min(res.values())
        out.record(worst >= bound, bound - worst, {"m": nl.m, "residuals": res})
    return out


SOLVE_M = (0.5, 1.0, 2.0, 3.0)


def _random_problem(rng, n_max=30, connected=False, sign=0):
    G = random_graph(rng, n_max, connected=connected)
    nl = power_law(SOLVE_M[int(rng.integers(len(SOLVE_M)))])
    lam = float(10.0 ** rng.uniform(-1, 1))
    g = random_function(rng, G, sign=sign)
    return G, nl, lam, g


def contractivity_suite(seed: int, cases: int, n_max: int = 30) -> SuiteResult:
    """||u||_1 <= ||g||_1 and the residual contract on random finite solves."""
    rng = np.random.default_rng(seed)
    out = SuiteResult("contractivity")
    for _ in range(cases):
        G, nl, lam, g = _random_problem(rng, n_max)
        sol = solve_finite(ResolventProblem(G, nl, lam, g))
        gn = norm(g, 1)
        excess = norm(sol.u, 1) - gn - 1e-8 * (1 + gn)
        res_excess = sol.residual_l1 - max(1e-10 * max(1.0, gn), sol.diagnostics.get("target", 0))
        ok = excess <= 0 and res_excess <= 0
        out.record(ok, max(excess, res_excess), {"m": nl.m, "lam": lam, "excess": excess,
                                                 "residual": sol.residual_l1})
    return out


def positivity_suite(seed: int, cases: int, n_max: int = 10) -> SuiteResult:
    """Strict sign propagation on connected graphs: g >= 0, g != 0 gives u > 0."""
    rng = np.random.default_rng(seed)
    out = SuiteResult("positivity")
    for i in range(cases):
        sign = 1 if i % 2 == 0 else -1
        G = random_graph(rng, n_max, n_min=2, connected=True)
        nl = power_law(SOLVE_M[int(rng.integers(len(SOLVE_M)))])
        lam = float(10.0 ** rng.uniform(-0.5, 0.5))
        g = random_function(rng, G, sign=sign)
        if not g.support:
            g = NodeFunction({G.nodes[0]: 0.5 * sign}, G)
        u = solve_finite(ResolventProblem(G, nl, lam, g)).u.to_array()
        ok = bool(np.all(sign * u > 0))
        out.record(ok, -float(np.min(sign * u)), {"m": nl.m, "lam": lam, "sign": sign})
    return out


def comparison_suite(seed: int, cases: int, n_max: int = 30) -> SuiteResult:
    """g1 >= g2 implies u1 >= u2 up to 1e-10."""
    rng = np.random.default_rng(seed)
    out = SuiteResult("comparison")
    for _ in range(cases):
        G, nl, lam, g2 = _random_problem(rng, n_max)
        bump = random_function(rng, G, sign=1)
        g1 = g2 + bump
        u1 = solve_finite(ResolventProblem(G, nl, lam, g1)).u.to_array()
        u2 = solve_finite(ResolventProblem(G, nl, lam, g2)).u.to_array()
        worst = float(np.max(u2 - u1)) if len(u1) else 0.0
        out.record(worst <= 1e-10, worst - 1e-10, {"m": nl.m, "lam": lam})
    return out


MASS_M = (0.5, 1.0, 2.0)


def mass_suite(seed: int, cases: int, n_max: int = 20) -> SuiteResult:
    """kappa = 0, f = 0: total mass sum u_k mu is constant along implicit Euler."""
    rng = np.random.default_rng(seed)
    out = SuiteResult("mass")
    for _ in range(cases):
        G = random_graph(rng, n_max, kappa=False)
        nl = power_law(MASS_M[int(rng.integers(len(MASS_M)))])
        u0 = random_function(rng, G)
        T = float(rng.uniform(0.2, 1.0))
        res = evolve(G, nl, u0, Forcing.zero(), T, T / 5)
        m0 = math.fsum(u0(x) * G.mu_at(x) for x in G.nodes)
        bound = 1e-8 * (1 + norm(u0, 1))
        worst = max(abs(math.fsum(s(x) * G.mu_at(x) for x in G.nodes) - m0) for s in res.states)
        out.record(worst <= bound, worst - bound, {"m": nl.m, "drift": worst})
    return out


def paired_runs(rng, n_max=15):
    """Two runs on one graph and grid with different data (same or different forcing)."""
    G = random_graph(rng, n_max)
    nl = power_law(SOLVE_M[int(rng.integers(len(SOLVE_M)))])
    T = float(rng.uniform(0.3, 1.0))
    eps = T / int(rng.integers(3, 8))
    u0a, u0b = random_function(rng, G), random_function(rng, G)
    if rng.random() < 0.5:
        fa = fb = Forcing.zero()
    else:
        cut = float(rng.uniform(0.1, 0.9)) * T
        fa = Forcing.piecewise([(0, cut, random_function(rng, G)), (cut, T, random_function(rng, G))])
        fb = Forcing.constant(random_function(rng, G))
    da, db = discretize(fa, T, eps, G), discretize(fb, T, eps, G)
    grid = sorted(set(da.grid) | set(db.grid))
    from .evolution import discretization_on_grid
    da = discretization_on_grid(fa, grid, eps, T, G)
    db = discretization_on_grid(fb, grid, eps, T, G)
    ra = run_discretization(G, nl, u0a, da)
    rb = run_discretization(G, nl, u0b, db)
    return G, nl, (ra, fa), (rb, fb)


def contraction_suite(seed: int, cases: int, n_max: int = 15) -> SuiteResult:
    rng = np.random.default_rng(seed)
    out = SuiteResult("contraction")
    for _ in range(cases):
        G, nl, (ra, fa), (rb, fb) = paired_runs(rng, n_max)
        gap = contraction_gap(ra, rb, fa, fb)
        out.record(gap <= 1e-8, gap - 1e-8, {"m": nl.m, "gap": gap})
    return out


def exhaustion_monotonicity(m: float = 2.0, lam: float = 1.0, levels=range(2, 21),
                            slack: float = 1e-10) -> dict:
    """Half-line, g = delta_0: u_n nondecreasing in n and shrinking level differences."""
    H = half_line()
    g = NodeFunction({"0": 1.0}, H)
    sols = {}
    for n, _, sol in exhaustion_levels(ResolventProblem(H, power_law(m), lam, g), max(levels)):
        sols[n] = sol.u
    ns = [n for n in levels if n in sols]
    worst = -math.inf
    for a, b in zip(ns, ns[1:]):
        keys = set(sols[a]) | set(sols[b])
        worst = max([worst] + [sols[a](x) - sols[b](x) for x in keys])
    d_first = norm(sols[ns[1]] - sols[ns[0]], 1)
    d_last = norm(sols[ns[-1]] - sols[ns[-2]], 1)
    return {"monotone": worst <= slack, "worst_decrease": worst,
            "first_difference": d_first, "last_difference": d_last,
            "shrinking": d_last < d_first}


def exhaustion_suite(seed: int, cases: int) -> SuiteResult:
    """Monotone exhaustion limits for nonnegative data on the half-line."""
    rng = np.random.default_rng(seed)
    out = SuiteResult("exhaustion")
    for i in range(cases):
        if i == 0:
            m, lam = 2.0, 1.0
        else:
            m = SOLVE_M[int(rng.integers(len(SOLVE_M)))]
            lam = float(10.0 ** rng.uniform(-1, 0.5))
        rep = exhaustion_monotonicity(m, lam)
        ok = rep["monotone"] and rep["shrinking"]
        out.record(ok, rep["worst_decrease"], {"m": m, "lam": lam, **rep})
    return out


def heat_errors(G: Graph, u0: NodeFunction, eps: float, T: float = 1.0) -> tuple[float, float]:
    """l1 errors at time T of implicit Euler at eps and eps/2 against exp(-T Delta) u0."""
    exact = expm_apply(assemble_dense(G), T, u0)
    nl = power_law(1.0)
    errs = []
    for e in (eps, eps / 2):
        res: EvolutionResult = evolve(G, nl, u0, Forcing.zero(), T, e)
        errs.append(norm(res.states[-1] - exact, 1))
    return errs[0], errs[1]


def heat_order_suite(seed: int, cases: int, n_max: int = 50, eps: float = 0.05) -> SuiteResult:
    """Observed order of implicit Euler for m = 1 between eps and eps/2."""
    rng = np.random.default_rng(seed)
    out = SuiteResult("heat-order")
    ratios = []
    for _ in range(cases):
        G = random_graph(rng, n_max, n_min=2)
        u0 = random_function(rng, G)
        e1, e2 = heat_errors(G, u0, eps)
        if e1 == 0 and e2 == 0:
            out.record(True, 0.0)
            continue
        ratio = e1 / e2
        order = math.log2(ratio)
        ratios.append(ratio)
        out.record(0.8 <= order <= 1.2, abs(order - 1.0) - 0.2, {"ratio": ratio, "order": order})
    out.extra["ratios"] = ratios
    return out


def dirichlet_suite(seed: int, cases: int, n_max: int = 30) -> SuiteResult:
    """Dirichlet Laplacian on A agrees with the full Laplacian of the zero extension."""
    rng = np.random.default_rng(seed)
    out = SuiteResult("dirichlet")
    for _ in range(cases):
        G = random_graph(rng, n_max)
        size = int(rng.integers(1, len(G) + 1))
        A = [G.nodes[i] for i in sorted(rng.choice(len(G), size=size, replace=False))]
        v = NodeFunction({x: float(rng.uniform(-1, 1)) for x in A if rng.random() < 0.8}, G)
        gap = dirichlet_commutation_check(G, A, v)
        out.record(gap <= 1e-12, gap - 1e-12, {"gap": gap})
    return out


EPS = float(np.finfo(float).eps)
BRACKET_LAMBDAS = (1.0, 1e-1, 1e-2, 1e-3)


def bracket_suite(seed: int, cases: int, n_max: int = 20) -> SuiteResult:
    """l1 bracket as the limit of its difference quotient.

    Nonzero entries of k are kept at magnitude >= 0.1 and those of z at <= 1,
    so lam = 1e-3 is already past every kink of lam -> ||k + lam z||_1 and the
    quotient has reached the closed form up to rounding.
    """
    rng = np.random.default_rng(seed)
    out = SuiteResult("bracket")
    for _ in range(cases):
        G = random_graph(rng, n_max)
        z = random_function(rng, G)
        k = NodeFunction({x: float(rng.choice([-1, 1]) * rng.uniform(0.1, 1.0))
                          for x in G.nodes if rng.random() < 0.6}, G)
        if not k.support:
            k = NodeFunction({G.nodes[0]: 1.0}, G)
        seq = bracket_by_limit(z, k, BRACKET_LAMBDAS)
        exact = bracket_plus(z, k, p=1)
        rel = abs(seq[-1] - exact) / max(abs(exact), 1e-300) if exact != 0 else abs(seq[-1])
        # once the quotient is flat only rounding moves it: ~eps * ||k|| * (||k|| + lam ||z||) / lam
        nk, nz = norm(k, 1), norm(z, 1)
        slack = [64 * EPS * nk * (nk + lam * nz) / lam for lam in BRACKET_LAMBDAS]
        monotone = all(b <= a + sa + sb for a, b, sa, sb in zip(seq, seq[1:], slack, slack[1:]))
        out.record(rel <= 1e-4 and monotone, rel - 1e-4, {"seq": seq, "exact": exact})
    return out


SUITES = {
    "accretivity": accretivity_suite,
    "contractivity": contractivity_suite,
    "comparison": comparison_suite,
    "mass": mass_suite,
    "exhaustion": exhaustion_suite,
    "heat-order": heat_order_suite,
}
