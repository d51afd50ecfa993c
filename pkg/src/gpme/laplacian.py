"""Graph Laplacian, Dirichlet Laplacian and the composite operator L = Delta Phi.

    (Delta v)(x) = (1/mu(x)) sum_y w(x,y) (v(x) - v(y)) + (kappa(x)/mu(x)) v(x)

Only finitely supported inputs are accepted; these lie in the domain of Delta
and of L on every graph.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import GraphError, TruncationError
from .functions import NodeFunction, norm, sgn
from .graph import DirichletSubgraph, Graph, LazyGraph, dirichlet_restrict
from .nonlinearity import Nonlinearity, extend


class LaplacianContext:
    """Laplacian bound to a graph, with cached degree arrays for finite graphs."""

    def __init__(self, graph):
        if isinstance(graph, DirichletSubgraph):
            graph = graph.to_graph()
        self.graph = graph
        self.finite = isinstance(graph, Graph)
        if self.finite:
            self.deg = graph.deg
            self.Deg = graph.Deg

    def __repr__(self):
        return f"LaplacianContext({self.graph!r})"

    def array(self, v: np.ndarray) -> np.ndarray:
        """Delta applied to a dense vector in node order (finite graphs only)."""
        G = self.graph
        return (G.weight_sums * v - G.W @ v + G.kappa * v) / G.mu


def apply(ctx: LaplacianContext, v: NodeFunction, x: str) -> float:
    """(Delta v)(x) for a finitely supported v."""
    G = ctx.graph
    vx = v(x)
    if isinstance(G, Graph) or G.locally_finite:
        terms = [w * (vx - v(y)) for y, w in G.neighbors(x)]
    else:
        # sum_y w (v_x - v_y) = v_x * sum_y w - sum_{y in supp v} w v_y
        terms = [vx * G.weight_sum(x)] if vx != 0 else []
        terms += [-G.weight(x, y) * vy for y, vy in v.items() if y != x and vy != 0]
    terms.append(G.kappa_at(x) * vx)
    return math.fsum(terms) / G.mu_at(x)


def _result_nodes(ctx: LaplacianContext, v: NodeFunction) -> list[str]:
    G = ctx.graph
    supp = v.support
    out = dict.fromkeys(supp)
    for x in supp:
        if isinstance(G, LazyGraph) and not G.has_finite_neighbors(x):
            raise TruncationError(
                f"Delta v is supported on the infinitely many neighbors of {x!r}")
        for y, _ in G.neighbors(x):
            out.setdefault(y)
    return list(out)


def apply_all(ctx: LaplacianContext, v: NodeFunction) -> NodeFunction:
    """Delta v on supp v and its neighbors."""
    if ctx.finite:
        G = ctx.graph
        return NodeFunction.from_array(G, ctx.array(v.to_array()))
    return NodeFunction({x: apply(ctx, v, x) for x in _result_nodes(ctx, v)}, ctx.graph)


def apply_L(ctx: LaplacianContext, nl: Nonlinearity, u: NodeFunction) -> NodeFunction:
    """L u = Delta Phi u."""
    return apply_all(ctx, extend(nl, u))


def green_mass_rate(ctx: LaplacianContext, v: NodeFunction) -> float:
    """sum_x (Delta v)(x) mu(x); equals sum_x kappa(x) v(x) on finite graphs."""
    if not ctx.finite:
        raise TruncationError("mass rate is only defined here for finite graphs")
    G = ctx.graph
    return math.fsum(ctx.array(v.to_array()) * G.mu)


def dirichlet_commutation_check(G, A, v: NodeFunction) -> float:
    """max over x in A of |Delta_dir v(x) - Delta(i v)(x)|, with i extension by zero."""
    sub = dirichlet_restrict(G, A)
    inside = set(sub.nodes)
    if any(x not in inside for x in v.support):
        raise GraphError("v must be supported in A")
    ctx_dir = LaplacianContext(sub)
    ctx_full = LaplacianContext(G)
    v_dir = v.with_graph(ctx_dir.graph)
    v_full = v.with_graph(G)
    worst = 0.0
    for x in sub.nodes:
        worst = max(worst, abs(apply(ctx_dir, v_dir, x) - apply(ctx_full, v_full, x)))
    return worst


def accretivity_residual(ctx: LaplacianContext, nl: Nonlinearity, u: NodeFunction,
                         v: NodeFunction, lam: float, p=1) -> float:
    """||(u - v) + lam (Lu - Lv)||_p - ||u - v||_p."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if ctx.finite:
        G = ctx.graph
        ua, va = u.to_array(), v.to_array()
        k = ua - va
        z = ctx.array(np.array([nl.phi(s) for s in ua])) - ctx.array(np.array([nl.phi(s) for s in va]))
        y = k + lam * z
        if p == 1:
            return math.fsum(np.abs(y) * G.mu) - math.fsum(np.abs(k) * G.mu)
        return math.sqrt(math.fsum(y * y * G.mu)) - math.sqrt(math.fsum(k * k * G.mu))
    k = u - v
    z = apply_L(ctx, nl, u) - apply_L(ctx, nl, v)
    return norm(k + lam * z, p) - norm(k, p)


def l1_sign_sum(ctx: LaplacianContext, nl: Nonlinearity, u: NodeFunction, v: NodeFunction) -> float:
    """sum over {u != v} of (Lu - Lv)(x) sgn(u - v)(x) mu(x); nonnegative on finite graphs."""
    z = apply_L(ctx, nl, u) - apply_L(ctx, nl, v)
    G = ctx.graph
    terms = []
    for x, zx in z.items():
        d = u(x) - v(x)
        if d != 0:
            terms.append(zx * sgn(d) * G.mu_at(x))
    return math.fsum(terms)


def energy_l2(ctx: LaplacianContext, u: NodeFunction) -> float:
    """sum_x (Delta u)(x) u(x) mu(x), the l2 accretivity form of the linear Laplacian."""
    G = ctx.graph
    a = u.to_array()
    return math.fsum(ctx.array(a) * a * G.mu)
