"""Built-in lazy graph families.

Every family takes optional ``mu``, ``kappa`` and ``w`` profiles. A profile is
either a number (constant) or a dict

    {"kind": "constant", "value": c}
    {"kind": "geometric", "scale": a, "ratio": r}      # a * r**k
    {"kind": "power", "scale": a, "exponent": p}        # a * (k + 1)**p

evaluated at a family-specific integer index k (node position, depth or leaf
label). Flags for H1/H2 and the Deg bound are derived from the profiles when
they can be read off exactly and left unset otherwise.
"""

from __future__ import annotations

import itertools
from typing import Callable, Mapping

from .errors import GraphError
from .graph import LazyGraph


class Profile:
    def __init__(self, spec=1.0, default=1.0):
        if spec is None:
            spec = default
        if isinstance(spec, (int, float)):
            spec = {"kind": "constant", "value": float(spec)}
        if not isinstance(spec, Mapping):
            raise GraphError(f"bad profile {spec!r}")
        self.spec = dict(spec)
        kind = self.kind = spec.get("kind", "constant")
        if kind == "constant":
            self.value = float(spec["value"])
        elif kind == "geometric":
            self.scale, self.ratio = float(spec.get("scale", 1.0)), float(spec["ratio"])
        elif kind == "power":
            self.scale, self.exponent = float(spec.get("scale", 1.0)), float(spec["exponent"])
        else:
            raise GraphError(f"unknown profile kind {kind!r}")

    def __call__(self, k: int) -> float:
        if self.kind == "constant":
            return self.value
        if self.kind == "geometric":
            return self.scale * self.ratio ** k
        return self.scale * (k + 1) ** self.exponent

    @property
    def constant(self) -> bool:
        return self.kind == "constant"

    def infimum(self) -> float:
        """inf over k >= 0."""
        if self.kind == "constant":
            return self.value
        if self.kind == "geometric":
            return self.scale if self.ratio >= 1 else 0.0
        return self.scale if self.exponent >= 0 else 0.0


def _flags(mu: Profile, kappa: Profile, w: Profile, max_degree: int | None):
    """(uniform_mu_lower_bound, uniform_deg_bound) readable from constant profiles."""
    inf_mu = mu.infimum()
    mu_lb = inf_mu if inf_mu > 0 else None
    deg_bound = None
    if mu.constant and kappa.constant and w.constant and max_degree is not None:
        deg_bound = (max_degree * w.value + kappa.value) / mu.value
    return mu_lb, deg_bound


def _is_int(x: str) -> bool:
    return str(int(x)) == x if x.lstrip("-").isdigit() else False


def half_line(mu=1.0, kappa=0.0, w=1.0) -> LazyGraph:
    """Nodes "0", "1", ...; edge (i, i+1) carries w(i); mu and kappa indexed by i."""
    mu, kappa, w = Profile(mu), Profile(kappa, 0.0), Profile(w)

    def nbrs(x):
        i = int(x)
        out = [(str(i - 1), w(i - 1))] if i > 0 else []
        return out + [(str(i + 1), w(i))]

    mu_lb, deg_bound = _flags(mu, kappa, w, 2)
    return LazyGraph("0", nbrs, lambda x: kappa(int(x)), lambda x: mu(int(x)),
                     locally_finite=True, uniform_mu_lower_bound=mu_lb,
                     uniform_deg_bound=deg_bound, level=int, name="half_line",
                     contains=lambda x: _is_int(x) and int(x) >= 0)


def integer_lattice_1d(mu=1.0, kappa=0.0, w=1.0) -> LazyGraph:
    """Nodes labelled by all integers; mu, kappa indexed by |i|, edge (i, i+1) by min(|i|, |i+1|)."""
    mu, kappa, w = Profile(mu), Profile(kappa, 0.0), Profile(w)

    def nbrs(x):
        i = int(x)
        return [(str(i - 1), w(min(abs(i), abs(i - 1)))), (str(i + 1), w(min(abs(i), abs(i + 1))))]

    mu_lb, deg_bound = _flags(mu, kappa, w, 2)
    return LazyGraph("0", nbrs, lambda x: kappa(abs(int(x))), lambda x: mu(abs(int(x))),
                     locally_finite=True, uniform_mu_lower_bound=mu_lb,
                     uniform_deg_bound=deg_bound, level=lambda x: abs(int(x)),
                     name="integer_lattice_1d", contains=_is_int)


def binary_tree(mu=1.0, kappa=0.0, w=1.0) -> LazyGraph:
    """Rooted binary tree; root "r", children of x are x+"0" and x+"1".

    mu and kappa are indexed by depth, the edge to a child by the parent's depth.
    """
    mu, kappa, w = Profile(mu), Profile(kappa, 0.0), Profile(w)

    def depth(x):
        return len(x) - 1

    def nbrs(x):
        d = depth(x)
        out = [(x[:-1], w(d - 1))] if d > 0 else []
        return out + [(x + "0", w(d)), (x + "1", w(d))]

    mu_lb, deg_bound = _flags(mu, kappa, w, 3)
    return LazyGraph("r", nbrs, lambda x: kappa(depth(x)), lambda x: mu(depth(x)),
                     locally_finite=True, uniform_mu_lower_bound=mu_lb,
                     uniform_deg_bound=deg_bound, level=depth, name="binary_tree",
                     contains=lambda x: x[:1] == "r" and set(x[1:]) <= {"0", "1"})


def star_infinite(mu=None, kappa=0.0, w=None) -> LazyGraph:
    """Center "0" joined to leaves "1", "2", ...; not locally finite.

    Edge (0, j) carries w(j), leaf j has mu(j), the center has mu(0). Defaults
    are geometric with ratio 1/2 so the center's weighted degree is finite
    and inf mu = 0.
    """
    mu = Profile(mu, {"kind": "geometric", "scale": 1.0, "ratio": 0.5})
    w = Profile(w, {"kind": "geometric", "scale": 1.0, "ratio": 0.5})
    kappa = Profile(kappa, 0.0)
    if w.kind == "geometric" and w.ratio < 1:
        center_sum = w.scale * w.ratio / (1 - w.ratio)
    elif w.kind == "power" and w.exponent < -1:
        # sum_{j>=1} a j^p  (the profile at index j is a (j+1)^p, so shift)
        center_sum = w.scale * (_zeta(-w.exponent) - 1.0)
    else:
        raise GraphError("star_infinite needs summable leaf weights (geometric ratio < 1 "
                         "or power exponent < -1)")

    def wt(j):
        return w(j - 1) if w.kind == "power" else w(j)

    def nbrs(x):
        j = int(x)
        if j == 0:
            return ((str(k), wt(k)) for k in itertools.count(1))
        return [("0", wt(j))]

    def weight_sum(x):
        j = int(x)
        return center_sum if j == 0 else wt(j)

    def weight(x, y):
        a, b = int(x), int(y)
        if a == b or (a != 0 and b != 0):
            return 0.0
        return wt(max(a, b))

    mu_lb = mu.infimum() if mu.infimum() > 0 else None
    return LazyGraph("0", nbrs, lambda x: kappa(int(x)), lambda x: mu(int(x)),
                     locally_finite=False, uniform_mu_lower_bound=mu_lb,
                     uniform_deg_bound=None, weight_sum=weight_sum, weight=weight,
                     level=lambda x: 0 if int(x) == 0 else 1, name="star_infinite",
                     contains=lambda x: _is_int(x) and int(x) >= 0)


def _zeta(s: float) -> float:
    from scipy.special import zeta
    return float(zeta(s))


FAMILIES: dict[str, Callable[..., LazyGraph]] = {
    "half_line": half_line,
    "integer_lattice_1d": integer_lattice_1d,
    "binary_tree": binary_tree,
    "star_infinite": star_infinite,
}


def make_family(name: str, params: Mapping | None = None) -> LazyGraph:
    try:
        factory = FAMILIES[name]
    except KeyError:
        raise GraphError(f"unknown graph family {name!r}; choose from {sorted(FAMILIES)}") from None
    params = dict(params or {})
    unknown = set(params) - {"mu", "kappa", "w"}
    if unknown:
        raise GraphError(f"unknown family parameters {sorted(unknown)}")
    return factory(**params)
