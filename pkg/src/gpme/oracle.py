"""Independent reference computations for tests.

Nothing here calls into the production Laplacian or resolvent code: the
dense matrix is assembled entry by entry from the raw edge list, the scalar
resolvent is found by grid scan plus bisection, and the l1 bracket is
evaluated through its defining difference quotient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import GpmeError
from .functions import NodeFunction
from .graph import Graph

MAX_DENSE = 2000


@dataclass(frozen=True)
class DenseOperator:
    matrix: np.ndarray
    nodes: tuple


def assemble_dense(G: Graph) -> DenseOperator:
    """Matrix M with (M v)_i = (Delta v)(x_i), built from the edge list."""
    n = len(G)
    if n > MAX_DENSE:
        raise GpmeError(f"dense assembly is capped at {MAX_DENSE} nodes, got {n}")
    M = np.zeros((n, n))
    pos = {x: i for i, x in enumerate(G.nodes)}
    for i, x in enumerate(G.nodes):
        M[i, i] = G.kappa_at(x) / G.mu_at(x)
    for u, v, w in G.edges():
        i, j = pos[u], pos[v]
        M[i, i] += w / G.mu_at(u)
        M[j, j] += w / G.mu_at(v)
        M[i, j] -= w / G.mu_at(u)
        M[j, i] -= w / G.mu_at(v)
    return DenseOperator(M, G.nodes)


def expm_apply(M: DenseOperator, t: float, u0: NodeFunction) -> NodeFunction:
    """exp(-t M) u0 by scaling and squaring (Pade)."""
    x = np.array([u0(node) for node in M.nodes])
    y = scipy.linalg.expm(-t * M.matrix) @ x
    return NodeFunction(dict(zip(M.nodes, y.tolist())), u0.graph)


def brute_resolvent_1d(kappa: float, mu: float, phi, lam: float, g: float,
                       grid_points: int = 2001, tol: float = 1e-12) -> float:
    """Solve u + lam (kappa/mu) phi(u) = g for a single isolated node.

    A dense scan of [min(0, g), max(0, g)] locates a sign change, then plain
    bisection narrows it to ``tol``.
    """
    if g == 0:
        return 0.0
    c = lam * kappa / mu
    if c == 0:
        return float(g)

    def F(s):
        return s + c * phi(s) - g

    xs = np.linspace(min(0.0, g), max(0.0, g), grid_points)
    vals = [F(s) for s in xs]
    lo = hi = None
    for a, b, fa, fb in zip(xs, xs[1:], vals, vals[1:]):
        if fa == 0:
            return float(a)
        if fa < 0 < fb or fb == 0:
            lo, hi = float(a), float(b)
            break
    if lo is None:
        raise GpmeError("no sign change found in the scan")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if F(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _l1(values: dict, mu) -> float:
    total = 0.0
    for x in sorted(values):
        total += abs(values[x]) * mu(x)
    return total


def bracket_by_limit(z: NodeFunction, k: NodeFunction, lambdas) -> list[float]:
    """||k||_1 * (||k + lam z||_1 - ||k||_1) / lam for each lam in ``lambdas``."""
    mu = k.graph.mu_at
    kv = dict(k.items())
    nk = _l1(kv, mu)
    if nk == 0:
        raise GpmeError("bracket limit needs k != 0")
    keys = set(kv) | set(z)
    out = []
    for lam in lambdas:
        shifted = {x: kv.get(x, 0.0) + lam * z(x) for x in keys}
        out.append(nk * (_l1(shifted, mu) - nk) / lam)
    return out
