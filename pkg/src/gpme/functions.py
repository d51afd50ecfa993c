"""Finitely supported node functions, measure-weighted norms and the l1/l2 bracket."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import GpmeError


class NodeFunction(Mapping):
    """Immutable finitely supported real function on the nodes of a graph.

    Absent nodes have value 0. The graph is only consulted for mu.
    """

    __slots__ = ("_values", "graph")

    def __init__(self, values: Mapping[str, float] | None, graph):
        vals = {}
        for x, v in (values or {}).items():
            v = float(v)
            if not math.isfinite(v):
                raise GpmeError(f"non-finite value {v} at node {x!r}")
            vals[str(x)] = v
        self._values = vals
        self.graph = graph

    @classmethod
    def zero(cls, graph) -> "NodeFunction":
        return cls({}, graph)

    @classmethod
    def from_array(cls, graph, arr, nodes=None) -> "NodeFunction":
        nodes = graph.nodes if nodes is None else nodes
        return cls(dict(zip(nodes, np.asarray(arr, dtype=float).tolist())), graph)

    def to_array(self, nodes=None) -> np.ndarray:
        nodes = self.graph.nodes if nodes is None else nodes
        return np.array([self._values.get(x, 0.0) for x in nodes])

    def __getitem__(self, x):
        return self._values[x]

    def __call__(self, x) -> float:
        return self._values.get(x, 0.0)

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)

    def __repr__(self):
        return f"NodeFunction({self._values!r})"

    @property
    def support(self) -> list[str]:
        return [x for x, v in self._values.items() if v != 0.0]

    def canonicalize(self) -> "NodeFunction":
        """Drop exactly-zero entries (tiny nonzero values are kept)."""
        return NodeFunction({x: v for x, v in self._values.items() if v != 0.0}, self.graph)

    def __eq__(self, other):
        if not isinstance(other, NodeFunction):
            return NotImplemented
        return self.canonicalize()._values == other.canonicalize()._values

    def __hash__(self):
        return hash(frozenset(self.canonicalize()._values.items()))

    def _combine(self, other, op):
        keys = list(self._values)
        keys += [x for x in other._values if x not in self._values]
        return NodeFunction({x: op(self(x), other(x)) for x in keys}, self.graph)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __neg__(self):
        return NodeFunction({x: -v for x, v in self._values.items()}, self.graph)

    def __mul__(self, c: float):
        return NodeFunction({x: c * v for x, v in self._values.items()}, self.graph)

    __rmul__ = __mul__

    def map(self, fn) -> "NodeFunction":
        return NodeFunction({x: fn(v) for x, v in self._values.items()}, self.graph)

    def restrict(self, nodes) -> "NodeFunction":
        keep = set(nodes)
        return NodeFunction({x: v for x, v in self._values.items() if x in keep}, self.graph)

    def with_graph(self, graph) -> "NodeFunction":
        return NodeFunction(self._values, graph)

    def min(self) -> float:
        return min(self._values.values(), default=0.0)

    def max(self) -> float:
        return max(self._values.values(), default=0.0)

    def is_nonnegative(self) -> bool:
        return all(v >= 0 for v in self._values.values())

    def is_nonpositive(self) -> bool:
        return all(v <= 0 for v in self._values.values())

    def to_dict(self) -> dict[str, float]:
        return dict(self._values)


@dataclass(frozen=True)
class SignParts:
    positive: NodeFunction
    negative: NodeFunction


def norm(f: NodeFunction, p=1) -> float:
    """l^p(X, mu) norm for p in {1, 2, inf}."""
    vals = f._values
    if p == 1:
        return math.fsum(abs(v) * f.graph.mu_at(x) for x, v in vals.items())
    if p == 2:
        return math.sqrt(math.fsum(v * v * f.graph.mu_at(x) for x, v in vals.items()))
    if p in (math.inf, "inf"):
        return max((abs(v) for v in vals.values()), default=0.0)
    raise GpmeError(f"unsupported norm exponent {p!r}")


def sgn(s: float) -> int:
    return (s > 0) - (s < 0)


def bracket_plus(z: NodeFunction, k: NodeFunction, p=2) -> float:
    """Semi-inner product <z, k>_+ of l^p(X, mu) for p in {1, 2}.

    p = 2 is the plain weighted inner product. For p = 1,
    ||k||_1 * (sum_{k=0} |z| mu + sum_{k!=0} z sgn(k) mu), with sgn(0) = 0.
    """
    mu = z.graph.mu_at
    if p == 2:
        return math.fsum(v * k(x) * mu(x) for x, v in z._values.items())
    if p == 1:
        terms = []
        for x, v in z._values.items():
            kx = k(x)
            terms.append((abs(v) if kx == 0 else v * sgn(kx)) * mu(x))
        return norm(k, 1) * math.fsum(terms)
    raise GpmeError(f"bracket only implemented for p in (1, 2), got {p!r}")


def sign_split(g: NodeFunction) -> SignParts:
    pos = {x: max(0.0, v) for x, v in g._values.items()}
    neg = {x: min(0.0, v) for x, v in g._values.items()}
    return SignParts(NodeFunction(pos, g.graph).canonicalize(),
                     NodeFunction(neg, g.graph).canonicalize())


# -- I/O ---------------------------------------------------------------

def function_from_json(data, graph) -> NodeFunction:
    if not isinstance(data, Mapping):
        raise GpmeError("node function JSON must be an object mapping node id to value")
    try:
        return NodeFunction({str(x): float(v) for x, v in data.items()}, graph)
    except (TypeError, ValueError) as exc:
        raise GpmeError(f"bad node function value: {exc}") from exc


def load_function(path, graph) -> NodeFunction:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GpmeError(f"node function file is not valid JSON: {exc}") from exc
    return function_from_json(data, graph)


def function_to_csv(f: NodeFunction) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["node", "value"])
    for x, v in f.items():
        writer.writerow([x, repr(v)])
    return buf.getvalue()


def function_from_csv(text: str, graph) -> NodeFunction:
    rows = list(csv.DictReader(io.StringIO(text)))
    try:
        return NodeFunction({r["node"]: float(r["value"]) for r in rows}, graph)
    except (KeyError, ValueError) as exc:
        raise GpmeError(f"bad node function CSV: {exc}") from exc
