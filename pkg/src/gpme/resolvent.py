"""Resolvent solves (id + lam Delta Phi) u = g, written as (Psi + lam Delta) v = g with u = Psi v.

Finite graphs are solved by nonlinear Gauss-Seidel in v: with its neighbors
frozen, the equation at node x is

    psi(v_x) + a_x v_x = c_x,   a_x = lam deg(x)/mu(x),
    c_x = g(x) + (lam/mu(x)) sum_y w(x,y) v_y,

whose left side is strictly increasing and onto, so it has exactly one root,
located between 0 and phi(c_x). Slow sweeps hand over to a damped global
Newton iteration. Infinite graphs are handled by solving on an exhaustion by
Dirichlet subgraphs and passing to the limit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, GpmeError, GraphError, HypothesisError
from .functions import NodeFunction, norm
from .graph import Graph, LazyGraph, connected_components, dirichlet_restrict, iter_exhaustion
from .nonlinearity import Nonlinearity

log = logging.getLogger(__name__)

EPS = np.finfo(float).eps
DEFAULT_TOL = 1e-10
SCALAR_TOL = 1e-14
MAX_SWEEPS = 100_000
STALL_WINDOW = 50
STALL_RATIO = 0.99
# also hand over to Newton when the observed rate predicts more sweeps than this
SLOW_SWEEPS = 200
# largest truncation solved during an exhaustion
MAX_EXHAUSTION_NODES = 200_000


@dataclass(frozen=True)
class ResolventProblem:
    graph: object
    nl: Nonlinearity
    lam: float
    g: NodeFunction

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise GpmeError(f"lambda must be positive and finite, got {self.lam}")


@dataclass
class ResolventSolution:
    u: NodeFunction
    v: NodeFunction
    residual_l1: float
    iterations: int
    truncation_level: int | None = None
    monotone_certificate: bool | None = None
    method: str = "gauss-seidel"
    diagnostics: dict = field(default_factory=dict)

    def summary(self) -> dict:
        out = {"residual_l1": self.residual_l1, "iterations": self.iterations,
               "method": self.method}
        if self.truncation_level is not None:
            out["truncation_level"] = self.truncation_level
        if self.monotone_certificate is not None:
            out["monotone_certificate"] = self.monotone_certificate
        return out


# -- scalar solve ------------------------------------------------------------

def _use_u_form(nl: Nonlinearity) -> bool:
    """Solve in u when phi has finite slope at 0 (m >= 1), else in v."""
    if nl.phi_prime is None:
        return False
    try:
        return math.isfinite(nl.phi_prime(0.0))
    except (ZeroDivisionError, OverflowError, ValueError):
        return False


def _scalar_root(fn, dfn, lo, hi, x0, tol):
    """Root of the increasing function fn on [lo, hi] with fn(lo) <= 0 <= fn(hi).

    Newton steps when ``dfn`` is given and the step stays inside the bracket,
    bisection otherwise.
    """
    x = min(max(x0, lo), hi)
    for _ in range(400):
        fx = fn(x)
        if fx == 0:
            return x
        if fx < 0:
            lo = x
        else:
            hi = x
        if hi - lo <= max(tol, 4 * EPS * max(abs(lo), abs(hi))):
            return 0.5 * (lo + hi)
        step_ok = False
        if dfn is not None:
            d = dfn(x)
            if d > 0 and math.isfinite(d):
                xn = x - fx / d
                if lo < xn < hi:
                    if abs(xn - x) <= max(tol, 4 * EPS * abs(xn)):
                        return xn
                    x = xn
                    step_ok = True
        if not step_ok:
            x = 0.5 * (lo + hi)
    return x


class _NodeSolver:
    """Per-node scalar solve of psi(v) + a v = c, returning (u, v)."""

    def __init__(self, nl: Nonlinearity, scalar_tol: float):
        self.nl = nl
        self.tol = scalar_tol
        self.u_form = _use_u_form(nl)

    def __call__(self, a: float, c: float, u_prev: float, v_prev: float) -> tuple[float, float]:
        nl = self.nl
        if c == 0:
            return 0.0, 0.0
        if a == 0:
            return c, nl.phi(c)
        if nl.linear:
            u = c / (1.0 + a)
            return u, u
        if self.u_form:
            # u + a phi(u) = c, root between 0 and c
            phi, dphi = nl.phi, nl.phi_prime
            fn = lambda s: s + a * phi(s) - c  # noqa: E731
            dfn = lambda s: 1.0 + a * dphi(s)  # noqa: E731
            lo, hi = (0.0, c) if c > 0 else (c, 0.0)
            u = _scalar_root(fn, dfn, lo, hi, u_prev, self.tol)
            return u, phi(u)
        # psi(v) + a v = c, root between 0 and phi(c)
        psi, dpsi = nl.psi, nl.psi_prime
        fn = lambda s: psi(s) + a * s - c  # noqa: E731
        dfn = (lambda s: dpsi(s) + a) if dpsi is not None else None  # noqa: E731
        b = nl.phi(c)
        lo, hi = (0.0, b) if c > 0 else (b, 0.0)
        v = _scalar_root(fn, dfn, lo, hi, v_prev, self.tol)
        return psi(v), v


# -- finite graphs -------------------------------------------------------------

def _residual(G: Graph, lam, u, v, g):
    r = u + lam * (G.weight_sums * v - G.W @ v + G.kappa * v) / G.mu - g
    return math.fsum(np.abs(r) * G.mu)


def _rounding_floor(G: Graph, lam, u, v, g):
    """Size of the residual that floating point evaluation alone can produce."""
    absv = np.abs(v)
    # edge weights are nonnegative, so W is its own absolute value
    scale = np.abs(u) + np.abs(g) + lam * (G.deg * absv + G.W @ absv) / G.mu
    return 16 * EPS * math.fsum(scale * G.mu)


def _newton(G: Graph, nl: Nonlinearity, lam, g, u, v, target, max_iter=100):
    """Damped Newton on the full system; returns (u, v, residual, iterations, ok)."""
    n = len(G)
    L = sp.diags(G.deg / G.mu) - sp.diags(1.0 / G.mu) @ G.W
    L = L.tocsr()
    dense = n <= 400
    Ld = L.toarray() if dense else None
    u_form = _use_u_form(nl)
    phi, psi = np.vectorize(nl.phi, otypes=[float]), np.vectorize(nl.psi, otypes=[float])
    if u_form:
        dphi = np.vectorize(nl.phi_prime, otypes=[float])
    else:
        dpsi = np.vectorize(nl.psi_prime, otypes=[float]) if nl.psi_prime else None

    def F(x):
        if u_form:
            vv = phi(x)
            return x + lam * (L @ vv) - g, x, vv
        uu = psi(x)
        return uu + lam * (L @ x) - g, uu, x

    x = u.copy() if u_form else v.copy()
    r, u, v = F(x)
    res = math.fsum(np.abs(r) * G.mu)
    it = 0
    for it in range(1, max_iter + 1):
        if res <= target:
            return u, v, res, it - 1, True
        if u_form:
            d = dphi(x)
            J = (np.eye(n) + lam * Ld * d[None, :]) if dense else \
                (sp.identity(n) + lam * L @ sp.diags(d)).tocsc()
        else:
            if dpsi is not None:
                d = dpsi(x)
            else:
                h = 1e-7 * np.maximum(1.0, np.abs(x))
                d = (psi(x + h) - psi(x - h)) / (2 * h)
            d = np.where(np.isfinite(d), d, 1e300)
            # regularize the diagonal where psi' vanishes
            d = d + 1e-12 * (1.0 + lam * G.Deg)
            J = (np.diag(d) + lam * Ld) if dense else (sp.diags(d) + lam * L).tocsc()
        try:
            step = np.linalg.solve(J, -r) if dense else spla.spsolve(J, -r)
        except np.linalg.LinAlgError:
            return u, v, res, it, False
        if not np.all(np.isfinite(step)):
            return u, v, res, it, False
        t = 1.0
        while t > 2.0 ** -40:
            xn = x + t * step
            rn, un, vn = F(xn)
            resn = math.fsum(np.abs(rn) * G.mu)
            if resn < (1 - 1e-4 * t) * res:
                break
            t *= 0.5
        else:
            return u, v, res, it, False
        x, r, u, v, res = xn, rn, un, vn, resn
    return u, v, res, it, res <= target


def _solve_connected(G: Graph, nl: Nonlinearity, lam: float, g: np.ndarray, target: float,
                     scalar_tol: float, max_sweeps: int):
    """Solve on one (finite) graph; returns (u, v, residual, iterations, method)."""
    n = len(G)
    node = _NodeSolver(nl, scalar_tol)
    W = G.W
    adj = [list(zip(W.indices[W.indptr[i]:W.indptr[i + 1]].tolist(),
                    W.data[W.indptr[i]:W.indptr[i + 1]].tolist())) for i in range(n)]
    a = (lam * G.deg / G.mu).tolist()
    coef = (lam / G.mu).tolist()
    gl = g.tolist()
    vl = [nl.phi(s) for s in gl]
    ul = list(gl)
    sign = 1 if np.all(g >= 0) else (-1 if np.all(g <= 0) else 0)

    def sweep():
        for i in range(n):
            s = math.fsum([w * vl[j] for j, w in adj[i]]) if adj[i] else 0.0
            ul[i], vl[i] = node(a[i], gl[i] + coef[i] * s, ul[i], vl[i])

    def resid():
        u, v = np.array(ul), np.array(vl)
        return _residual(G, lam, u, v, g), max(target, _rounding_floor(G, lam, u, v, g))

    history = []
    method = "gauss-seidel"
    res, goal = resid()
    sweeps = 0
    newton_tries = 0
    while res > goal:
        if sweeps >= max_sweeps:
            raise ConvergenceError(
                f"resolvent solve did not converge in {max_sweeps} sweeps "
                f"(residual {res:.3e} > {goal:.3e})", best_residual=min(history + [res]))
        sweep()
        sweeps += 1
        res, goal = resid()
        history.append(res)
        stalled = False
        if len(history) > STALL_WINDOW:
            ratio = history[-1] / history[-1 - STALL_WINDOW] if history[-1 - STALL_WINDOW] else 0.0
            stalled = ratio > STALL_RATIO
            if not stalled and 0 < ratio < 1 and res > goal:
                # slow but steady: extrapolate the sweep count still needed
                remaining = STALL_WINDOW * math.log(goal / res) / math.log(ratio)
                stalled = remaining > SLOW_SWEEPS
        if stalled and res > goal and newton_tries < 3:
            newton_tries += 1
            u, v, nres, nit, ok = _newton(G, nl, lam, g, np.array(ul), np.array(vl), goal)
            sweeps += nit
            method = "gauss-seidel+newton"
            log.debug("newton fallback: %d iterations, residual %.3e", nit, nres)
            if nres < res:
                if sign > 0:
                    v = np.maximum(v, 0.0)
                elif sign < 0:
                    v = np.minimum(v, 0.0)
                ul, vl = [nl.psi(s) for s in v.tolist()], v.tolist()
                # polish: one sweep restores exact sign structure node by node
                sweep()
                sweeps += 1
                res, goal = resid()
                history = [res]
    return np.array(ul), np.array(vl), res, sweeps, method


def _g_array(p: ResolventProblem, G: Graph) -> np.ndarray:
    extra = [x for x in p.g.support if x not in G.index]
    if extra:
        raise GpmeError(f"g is supported outside the graph: {extra[:3]}")
    return p.g.to_array(G.nodes)


def _solve_blocks(p: ResolventProblem, blocks, tol, scalar_tol, max_sweeps) -> ResolventSolution:
    G = p.graph
    g = _g_array(p, G)
    g_norm = math.fsum(np.abs(g) * G.mu)
    target = tol * max(1.0, g_norm)
    u = np.zeros(len(G))
    v = np.zeros(len(G))
    iters = 0
    methods = set()
    for block in blocks:
        idx = np.array([G.index[x] for x in block])
        gb = g[idx]
        if not np.any(gb):
            continue
        sub = G if len(blocks) == 1 else G.subgraph(block)
        share = target * len(block) / len(G)
        ub, vb, _, it, method = _solve_connected(sub, p.nl, p.lam, gb, share, scalar_tol, max_sweeps)
        u[idx], v[idx] = ub, vb
        iters = max(iters, it)
        methods.add(method)
    res = _residual(G, p.lam, u, v, g)
    method = "gauss-seidel+newton" if "gauss-seidel+newton" in methods else "gauss-seidel"
    return ResolventSolution(NodeFunction.from_array(G, u), NodeFunction.from_array(G, v),
                             res, iters, method=method,
                             diagnostics={"components": len(blocks), "target": target,
                                          "g_l1": g_norm})


def solve_finite(p: ResolventProblem, tol: float = DEFAULT_TOL, scalar_tol: float = SCALAR_TOL,
                 max_sweeps: int = MAX_SWEEPS) -> ResolventSolution:
    """Unique solution of (id + lam Delta Phi) u = g on a finite graph.

    Disconnected graphs are solved component by component.
    """
    if not isinstance(p.graph, Graph):
        raise GpmeError("solve_finite needs a finite Graph")
    return _solve_blocks(p, connected_components(p.graph), tol, scalar_tol, max_sweeps)


def solve_componentwise(p: ResolventProblem, tol: float = DEFAULT_TOL,
                        scalar_tol: float = SCALAR_TOL,
                        max_sweeps: int = MAX_SWEEPS) -> ResolventSolution:
    """Solve each connected component on its own and assemble the result."""
    return solve_finite(p, tol, scalar_tol, max_sweeps)


def comparison_check(G: Graph, nl: Nonlinearity, lam: float, g1: NodeFunction,
                     g2: NodeFunction, tol: float = 1e-10, **solver_kw) -> bool:
    """Solve for g1 >= g2 and report whether v1 >= v2 - tol and u1 >= u2 - tol."""
    if any(g1(x) < g2(x) for x in set(g1) | set(g2)):
        raise GpmeError("comparison_check needs g1 >= g2 pointwise")
    s1 = solve_finite(ResolventProblem(G, nl, lam, g1), **solver_kw)
    s2 = solve_finite(ResolventProblem(G, nl, lam, g2), **solver_kw)
    v_ok = bool(np.all(s1.v.to_array() >= s2.v.to_array() - tol))
    u_ok = bool(np.all(s1.u.to_array() >= s2.u.to_array() - tol))
    return v_ok and u_ok


# -- infinite graphs by exhaustion -----------------------------------------------

def hypothesis_flags(graph, nl: Nonlinearity) -> dict:
    if isinstance(graph, Graph):
        return {"H1": True, "H2": bool(len(graph)) and float(graph.mu.min()) > 0,
                "H3": True}
    return graph.hypotheses(nl)


def require_hypotheses(graph, nl: Nonlinearity, sign_definite: bool, what: str = "data") -> dict:
    flags = hypothesis_flags(graph, nl)
    if not sign_definite and not any(flags.values()):
        raise HypothesisError(
            f"sign-changing {what} requires H1/H2/H3 (graph is not locally finite, "
            "inf mu = 0, and no Deg bound with globally Lipschitz phi)", "H1/H2/H3")
    return flags


def exhaustion_levels(p: ResolventProblem, max_level: int, inner_tol: float = 1e-13,
                      max_nodes: int = MAX_EXHAUSTION_NODES, **solver_kw):
    """Yield (n, X_n, solution on the Dirichlet subgraph over X_n) for n = 1, 2, ...

    Stops after ``max_level`` levels or when the exhaustion stabilizes.
    Solutions are returned as functions on the parent graph (zero off X_n).
    """
    graph = p.graph
    for n, X in enumerate(iter_exhaustion(graph), start=1):
        if len(X) > max_nodes:
            raise ConvergenceError(
                f"exhaustion level {n} has {len(X)} nodes, above the budget of {max_nodes}",
                best_residual=None)
        sub = dirichlet_restrict(graph, X).to_graph()
        gn = p.g.restrict(X).with_graph(sub)
        sol = solve_finite(ResolventProblem(sub, p.nl, p.lam, gn), tol=inner_tol, **solver_kw)
        sol.u = sol.u.with_graph(graph).canonicalize()
        sol.v = sol.v.with_graph(graph).canonicalize()
        sol.truncation_level = n
        yield n, X, sol
        if n >= max_level:
            return


def solve_exhaustion(p: ResolventProblem, tol: float = 1e-8, max_level: int = 200,
                     inner_tol: float = 1e-13, stagnation: int = 3,
                     monotone_slack: float = 1e-10, **solver_kw) -> ResolventSolution:
    """Limit of Dirichlet-truncation solutions u_n on an exhaustion of a lazy graph.

    Stops once ||u_{n+1} - u_n||_1 <= tol on ``stagnation`` consecutive levels
    with supp g inside X_n, or when the exhaustion stabilizes (finite graph).
    For sign-definite g the monotonicity of u_n in n is certified along the way.
    """
    graph = p.graph
    if isinstance(graph, Graph):
        graph = LazyGraph.from_graph(graph)
        p = ResolventProblem(graph, p.nl, p.lam, p.g.with_graph(graph))
    g = p.g
    unknown = [x for x in g.support if x not in graph]
    if unknown:
        raise GraphError(f"g is supported on ids that are not nodes of the graph: {unknown[:3]}")
    sign = 1 if g.is_nonnegative() else (-1 if g.is_nonpositive() else 0)
    flags = require_hypotheses(graph, p.nl, sign != 0, "g")
    supp = set(g.support)

    prev = None
    below = 0
    diffs, sizes = [], []
    monotone = True if sign != 0 else None
    iters = 0
    settled = False
    for n, X, sol in exhaustion_levels(p, max_level, inner_tol, **solver_kw):
        iters += sol.iterations
        sizes.append(len(X))
        if prev is not None:
            d = norm(sol.u - prev.u, 1)
            diffs.append(d)
            if sign != 0:
                lower, upper = (prev.u, sol.u) if sign > 0 else (sol.u, prev.u)
                keys = set(lower) | set(upper)
                if any(lower(x) > upper(x) + monotone_slack for x in keys):
                    monotone = False
            below = below + 1 if d <= tol else 0
            if below >= stagnation and supp <= set(X):
                settled = True
        prev = sol
        if settled:
            break
    else:
        # the exhaustion itself ran out: X_n is the whole (finite) graph
        settled = prev is not None and n < max_level
    if not settled:
        raise ConvergenceError(
            f"exhaustion did not settle within {max_level} levels "
            f"(last difference {diffs[-1] if diffs else float('nan'):.3e})",
            best_residual=diffs[-1] if diffs else None, history=diffs)
    last = prev
    report = graph.verify_flags(X) if isinstance(graph, LazyGraph) else {}
    last.iterations = iters
    last.monotone_certificate = monotone
    last.diagnostics.update({
        "level_differences": diffs, "level_sizes": sizes, "hypotheses": flags,
        "flag_check": report, "exhaustion": "balls" if graph.locally_finite else "forward-neighbor",
        "notes": "solution obtained as limit of compactly supported approximants; "
                 "case 3 of the comparison principle (infinite paths) is not checked",
    })
    return last


def solve(p: ResolventProblem, **kw) -> ResolventSolution:
    """Dispatch on the graph type."""
    if isinstance(p.graph, Graph):
        return solve_finite(p, **{k: v for k, v in kw.items() if k in ("tol", "scalar_tol", "max_sweeps")})
    return solve_exhaustion(p, **kw)
