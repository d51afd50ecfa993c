"""Weighted graphs G = (X, w, kappa, mu), lazy infinite graphs and Dirichlet subgraphs.

Finite graphs are stored as a symmetric CSR matrix over a fixed node order.
Lazy graphs answer neighbor / kappa / mu queries on demand and are explored
through an exhaustion X_1 c X_2 c ... of finite connected node sets.
"""

from __future__ import annotations

import itertools
import json
import math
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc

from .errors import GraphError, TruncationError

# cap on neighbors scanned while looking for a forward neighbor of a node
# with infinitely many neighbors
MAX_NEIGHBOR_SCAN = 100_000


class Graph:
    """Finite weighted graph with symmetric edge weights, killing term and measure.

    Node ids are strings; the order given at construction is the internal
    index order and is never changed.
    """

    def __init__(self, nodes: Sequence[str], edges: Iterable[tuple[str, str, float]],
                 mu: Mapping[str, float] | None = None,
                 kappa: Mapping[str, float] | None = None):
        self.nodes = tuple(str(x) for x in nodes)
        self.index = {x: i for i, x in enumerate(self.nodes)}
        if len(self.index) != len(self.nodes):
            raise GraphError("duplicate node ids")
        n = len(self.nodes)
        mu = mu or {}
        kappa = kappa or {}
        self.mu = np.array([float(mu.get(x, 1.0)) for x in self.nodes])
        self.kappa = np.array([float(kappa.get(x, 0.0)) for x in self.nodes])
        if n and not np.all(self.mu > 0):
            raise GraphError("mu must be strictly positive at every node")
        if n and not np.all(self.kappa >= 0):
            raise GraphError("kappa must be nonnegative")
        if not (np.all(np.isfinite(self.mu)) and np.all(np.isfinite(self.kappa))):
            raise GraphError("mu and kappa must be finite")

        seen = set()
        rows, cols, vals = [], [], []
        for u, v, w in edges:
            u, v, w = str(u), str(v), float(w)
            if u not in self.index or v not in self.index:
                raise GraphError(f"edge ({u}, {v}) references an unknown node")
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            key = frozenset((u, v))
            if key in seen:
                raise GraphError(f"duplicate edge ({u}, {v})")
            seen.add(key)
            if not (math.isfinite(w) and w >= 0):
                raise GraphError(f"edge ({u}, {v}) has invalid weight {w}")
            if w == 0:
                continue
            i, j = self.index[u], self.index[v]
            rows += [i, j]
            cols += [j, i]
            vals += [w, w]
        W = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        W.sort_indices()
        self.W = W
        # weight sums in ascending neighbor order, compensated
        self.weight_sums = np.array([
            math.fsum(W.data[W.indptr[i]:W.indptr[i + 1]]) for i in range(n)])

    # -- queries shared with LazyGraph ---------------------------------
    locally_finite = True

    def __len__(self):
        return len(self.nodes)

    def __contains__(self, x):
        return x in self.index

    def __repr__(self):
        return f"Graph(|X|={len(self.nodes)}, |E|={self.W.nnz // 2})"

    def _idx(self, x: str) -> int:
        try:
            return self.index[x]
        except KeyError:
            raise GraphError(f"unknown node id {x!r}") from None

    def mu_at(self, x: str) -> float:
        return float(self.mu[self._idx(x)])

    def kappa_at(self, x: str) -> float:
        return float(self.kappa[self._idx(x)])

    def neighbors(self, x: str) -> list[tuple[str, float]]:
        i = self._idx(x)
        lo, hi = self.W.indptr[i], self.W.indptr[i + 1]
        return [(self.nodes[j], float(w)) for j, w in zip(self.W.indices[lo:hi], self.W.data[lo:hi])]

    def neighbors_within(self, x: str, subset) -> list[tuple[str, float]]:
        return [(y, w) for y, w in self.neighbors(x) if y in subset]

    def weight(self, x: str, y: str) -> float:
        return float(self.W[self._idx(x), self._idx(y)])

    def weight_sum(self, x: str) -> float:
        return float(self.weight_sums[self._idx(x)])

    def edges(self) -> list[tuple[str, str, float]]:
        """Each undirected edge once, as (u, v, w) with index(u) < index(v)."""
        C = sp.triu(self.W, k=1).tocoo()
        order = np.lexsort((C.col, C.row))
        return [(self.nodes[C.row[k]], self.nodes[C.col[k]], float(C.data[k])) for k in order]

    @property
    def deg(self) -> np.ndarray:
        return self.weight_sums + self.kappa

    @property
    def Deg(self) -> np.ndarray:
        return self.deg / self.mu

    def subgraph(self, nodes: Sequence[str], kappa: Mapping[str, float] | None = None) -> "Graph":
        """Induced subgraph; ``kappa`` overrides the restricted killing term."""
        keep = set(nodes)
        for x in nodes:
            self._idx(x)
        kap = {x: self.kappa_at(x) for x in nodes}
        if kappa is not None:
            kap.update(kappa)
        edges = [(u, v, w) for u, v, w in self.edges() if u in keep and v in keep]
        return Graph(nodes, edges, {x: self.mu_at(x) for x in nodes}, kap)

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "nodes": [{"id": x, "mu": float(m), "kappa": float(k)}
                      for x, m, k in zip(self.nodes, self.mu, self.kappa)],
            "edges": [{"u": u, "v": v, "w": w} for u, v, w in self.edges()],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Graph":
        try:
            nodes = [str(rec["id"]) for rec in data["nodes"]]
            mu = {str(rec["id"]): float(rec.get("mu", 1.0)) for rec in data["nodes"]}
            kappa = {str(rec["id"]): float(rec.get("kappa", 0.0)) for rec in data["nodes"]}
            edges = [(rec["u"], rec["v"], float(rec.get("w", 1.0))) for rec in data.get("edges", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphError(f"malformed graph data: {exc}") from exc
        return cls(nodes, edges, mu, kappa)


def load_graph(path) -> Graph:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GraphError(f"graph file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise GraphError("graph file must hold a JSON object")
    return Graph.from_dict(data)


def save_graph(G: Graph, path) -> None:
    with open(path, "w") as fh:
        json.dump(G.to_dict(), fh, indent=1)


class LazyGraph:
    """A countable graph described by on-demand queries.

    ``neighbors(x)`` yields ``(y, w)`` pairs in a fixed order; for graphs that
    are not locally finite it may be an infinite iterator, in which case
    ``weight_sum`` (total edge weight at x) and ``weight`` (pairwise lookup)
    must be supplied. ``level(x)`` is the combinatorial distance from the root
    and is used to identify forward neighbors.

    The flags ``locally_finite``, ``uniform_mu_lower_bound`` and
    ``uniform_deg_bound`` are asserted by the caller; ``verify_flags`` checks
    them on a finite region only.
    """

    def __init__(self, root: str, neighbors: Callable[[str], Iterable[tuple[str, float]]],
                 kappa_at: Callable[[str], float], mu_at: Callable[[str], float], *,
                 locally_finite: bool = True,
                 uniform_mu_lower_bound: float | None = None,
                 uniform_deg_bound: float | None = None,
                 weight_sum: Callable[[str], float] | None = None,
                 weight: Callable[[str, str], float] | None = None,
                 level: Callable[[str], int] | None = None,
                 name: str = "lazy",
                 contains: Callable[[str], bool] | None = None):
        self.root = str(root)
        self._neighbors = neighbors
        self._kappa_at = kappa_at
        self._mu_at = mu_at
        self.locally_finite = bool(locally_finite)
        self.uniform_mu_lower_bound = uniform_mu_lower_bound
        self.uniform_deg_bound = uniform_deg_bound
        self._weight_sum = weight_sum
        self._weight = weight
        self._level = level
        self.name = name
        self._contains = contains
        self._cache: dict[str, list[tuple[str, float]]] = {}
        self._lock = threading.Lock()

    def __repr__(self):
        return f"LazyGraph({self.name!r}, root={self.root!r})"

    @classmethod
    def from_graph(cls, G: Graph, root: str | None = None) -> "LazyGraph":
        root = G.nodes[0] if root is None else root
        G._idx(root)
        return cls(root, G.neighbors, G.kappa_at, G.mu_at, locally_finite=True,
                   uniform_mu_lower_bound=float(G.mu.min()) if len(G) else None,
                   uniform_deg_bound=float(G.Deg.max()) if len(G) else None,
                   weight_sum=G.weight_sum, weight=G.weight, name="finite",
                   contains=G.__contains__)

    def __contains__(self, x) -> bool:
        """Membership test; graphs built without one accept every id."""
        return True if self._contains is None else bool(self._contains(str(x)))

    def mu_at(self, x: str) -> float:
        return float(self._mu_at(x))

    def kappa_at(self, x: str) -> float:
        return float(self._kappa_at(x))

    def neighbors(self, x: str) -> Iterable[tuple[str, float]]:
        if not self.locally_finite:
            return ((str(y), float(w)) for y, w in self._neighbors(x))
        with self._lock:
            hit = self._cache.get(x)
        if hit is None:
            hit = [(str(y), float(w)) for y, w in self._neighbors(x)]
            with self._lock:
                hit = self._cache.setdefault(x, hit)
        return hit

    def has_finite_neighbors(self, x: str) -> bool:
        return self.locally_finite

    def neighbors_within(self, x: str, subset) -> list[tuple[str, float]]:
        if self.locally_finite:
            return [(y, w) for y, w in self.neighbors(x) if y in subset]
        if self._weight is None:
            raise TruncationError(
                f"cannot restrict neighbors of {x!r}: graph is not locally finite "
                "and no pairwise weight query was supplied")
        out = []
        for y in subset:
            if y != x:
                w = float(self._weight(x, y))
                if w > 0:
                    out.append((y, w))
        return out

    def weight(self, x: str, y: str) -> float:
        """w(x, y); uses the pairwise query when given, else scans the neighbors of x."""
        if self._weight is not None:
            return float(self._weight(x, y))
        if not self.locally_finite:
            raise TruncationError(f"no pairwise weight query for {x!r} (not locally finite)")
        return dict(self.neighbors(x)).get(y, 0.0)

    def weight_sum(self, x: str) -> float:
        if self._weight_sum is not None:
            return float(self._weight_sum(x))
        if not self.locally_finite:
            raise TruncationError(
                f"weighted degree of {x!r} needs infinitely many terms and no "
                "weight_sum query was supplied")
        return math.fsum(w for _, w in self.neighbors(x))

    def level(self, x: str) -> int | None:
        return None if self._level is None else int(self._level(x))

    # hypotheses of the existence theory, as asserted by the caller
    @property
    def h1(self) -> bool:
        return self.locally_finite

    @property
    def h2(self) -> bool:
        return self.uniform_mu_lower_bound is not None and self.uniform_mu_lower_bound > 0

    def h3(self, nl=None) -> bool:
        """sup Sum_y w / mu bounded (implied by a Deg bound) and Phi(l1) in l1."""
        return self.uniform_deg_bound is not None and nl is not None and nl.global_lipschitz is not None

    def hypotheses(self, nl=None) -> dict:
        return {"H1": self.h1, "H2": self.h2, "H3": self.h3(nl)}

    def verify_flags(self, nodes: Iterable[str]) -> dict:
        """Check the asserted flags on a finite set of nodes.

        Returns a report dict; the global statements remain unverifiable.
        """
        report = {"scope": "verified-on-truncation", "nodes_checked": 0,
                  "mu_lower_bound_ok": True, "deg_bound_ok": True, "symmetric": True}
        for x in nodes:
            report["nodes_checked"] += 1
            m = self.mu_at(x)
            if self.uniform_mu_lower_bound is not None and m < self.uniform_mu_lower_bound:
                report["mu_lower_bound_ok"] = False
            if self.uniform_deg_bound is not None:
                try:
                    D = (self.weight_sum(x) + self.kappa_at(x)) / m
                except TruncationError:
                    D = math.inf
                if D > self.uniform_deg_bound * (1 + 1e-12):
                    report["deg_bound_ok"] = False
            if self.locally_finite:
                for y, w in self.neighbors(x):
                    back = dict(self.neighbors(y))
                    if back.get(x) != w:
                        report["symmetric"] = False
        return report


@dataclass(frozen=True)
class DirichletSubgraph:
    """Restriction of a graph to a finite node subset A with Dirichlet boundary.

    ``b_dir[x]`` is the total weight of edges from x to nodes outside A, and
    ``kappa_dir[x] = kappa(x) + b_dir[x]``.
    """

    parent: object
    nodes: tuple
    b_dir: Mapping[str, float]
    kappa_dir: Mapping[str, float]
    edges: tuple = field(repr=False)

    @property
    def interior(self) -> list[str]:
        return [x for x in self.nodes if self.b_dir[x] == 0]

    @property
    def boundary(self) -> list[str]:
        return [x for x in self.nodes if self.b_dir[x] != 0]

    def to_graph(self) -> Graph:
        return Graph(self.nodes, self.edges, {x: self.parent.mu_at(x) for x in self.nodes},
                     self.kappa_dir)


def degree(G, x: str) -> tuple[float, float]:
    """Weighted degree deg(x) = Sum_y w(x,y) + kappa(x) and Deg(x) = deg(x)/mu(x)."""
    if isinstance(G, Graph):
        G._idx(x)
    d = G.weight_sum(x) + G.kappa_at(x)
    return d, d / G.mu_at(x)


def connected_components(G: Graph) -> list[list[str]]:
    """Partition of the node set into connected components.

    Blocks are listed by their first node in index order, and nodes inside a
    block keep the graph's order.
    """
    if len(G) == 0:
        return []
    _, labels = _cc(G.W, directed=False)
    blocks: dict[int, list[str]] = {}
    for x, lab in zip(G.nodes, labels):
        blocks.setdefault(int(lab), []).append(x)
    return list(blocks.values())


def dirichlet_restrict(G, A: Sequence[str]) -> DirichletSubgraph:
    """Dirichlet subgraph on the node subset ``A`` of a finite or lazy graph."""
    A = tuple(dict.fromkeys(str(x) for x in A))
    if not A:
        raise GraphError("Dirichlet restriction needs a nonempty node subset")
    inside = set(A)
    b_dir, kappa_dir, edges = {}, {}, []
    pos = {x: i for i, x in enumerate(A)}
    for x in A:
        if isinstance(G, Graph) or G.has_finite_neighbors(x):
            nbrs = list(G.neighbors(x))
            b = math.fsum(w for y, w in nbrs if y not in inside)
            within = [(y, w) for y, w in nbrs if y in inside]
        else:
            within = G.neighbors_within(x, A)
            b = G.weight_sum(x) - math.fsum(w for _, w in within)
            b = max(b, 0.0)
        b_dir[x] = b
        kappa_dir[x] = G.kappa_at(x) + b
        edges += [(x, y, w) for y, w in within if pos[x] < pos[y]]
    return DirichletSubgraph(G, A, b_dir, kappa_dir, tuple(edges))


def _forward_ok(G: LazyGraph, x: str, y: str) -> bool:
    lx, ly = G.level(x), G.level(y)
    return lx is None or ly is None or ly == lx + 1


def iter_exhaustion(G) -> Iterator[list[str]]:
    """Yield X_1 c X_2 c ... (each as an ordered list) for a graph seen from its root.

    Locally finite graphs are exhausted by balls, X_{k+1} = B_k(root). Other
    graphs use forward-neighbor enumeration: every node of X_k contributes its
    first forward neighbor not yet in X_k. The sequence stops when X_k no
    longer grows (the graph is finite).
    """
    if isinstance(G, Graph):
        G = LazyGraph.from_graph(G)
    current = [G.root]
    members = {G.root}
    yield list(current)
    if G.locally_finite:
        frontier = [G.root]
        while True:
            nxt = []
            for x in frontier:
                for y, _ in G.neighbors(x):
                    if y not in members:
                        members.add(y)
                        nxt.append(y)
            if not nxt:
                return
            current += nxt
            frontier = nxt
            yield list(current)
    else:
        while True:
            added = []
            for x in current:
                for y, _ in itertools.islice(G.neighbors(x), MAX_NEIGHBOR_SCAN):
                    if y not in members and _forward_ok(G, x, y):
                        members.add(y)
                        added.append(y)
                        break
            if not added:
                return
            current += added
            yield list(current)


def exhaustion(G, n: int) -> list[list[str]]:
    """First ``n`` sets of the exhaustion; repeats the last set once it stabilizes."""
    out: list[list[str]] = []
    for X in iter_exhaustion(G):
        out.append(X)
        if len(out) == n:
            return out
    while out and len(out) < n:
        out.append(list(out[-1]))
    return out


def bfs_order(G: Graph, root: str) -> list[str]:
    """Nodes reachable from ``root``, in breadth-first order."""
    seen = {root}
    order = [root]
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y, _ in G.neighbors(x):
            if y not in seen:
                seen.add(y)
                order.append(y)
                queue.append(y)
    return order
