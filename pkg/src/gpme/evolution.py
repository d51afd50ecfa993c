"""Implicit Euler time stepping for  d/dt u + Delta Phi u = f  on a graph.

A run picks a time grid 0 = t_0 < ... < t_n = T with steps <= eps, samples the
forcing at the right endpoints, f_k = f(t_k), and solves

    (u_k - u_{k-1}) / lam_k + Delta Phi u_k = f_k,   lam_k = t_k - t_{k-1},

one resolvent problem per step. The piecewise constant trajectory
u(t) = u_k on (t_{k-1}, t_k] is the eps-approximate solution; halving the grid
until consecutive trajectories agree gives the mild solution to a tolerance.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConvergenceError, GpmeError
from .functions import NodeFunction, norm
from .graph import Graph
from .nonlinearity import Nonlinearity
from .resolvent import (ResolventProblem, ResolventSolution, require_hypotheses,
                        solve_exhaustion, solve_finite)


@dataclass(frozen=True)
class Forcing:
    """Forcing term f(t) with values in finitely supported node functions.

    ``kind`` is one of ``zero``, ``constant``, ``piecewise_constant`` or
    ``sampled``. Pieces are (t_start, t_end, value) on (t_start, t_end], the
    first one closed at t_start.
    """

    kind: str
    value: NodeFunction | None = None
    pieces: tuple = ()
    fn: Callable[[float], NodeFunction] | None = None

    @classmethod
    def zero(cls) -> "Forcing":
        return cls("zero")

    @classmethod
    def constant(cls, value: NodeFunction) -> "Forcing":
        return cls("constant", value=value)

    @classmethod
    def piecewise(cls, pieces: Sequence[tuple[float, float, NodeFunction]]) -> "Forcing":
        pieces = tuple(sorted(((float(a), float(b), f) for a, b, f in pieces), key=lambda p: p[0]))
        if not pieces:
            raise GpmeError("piecewise forcing needs at least one piece")
        if pieces[0][0] != 0.0:
            raise GpmeError("forcing pieces must start at t = 0")
        for (a, b, _), (c, _, _) in zip(pieces, pieces[1:]):
            if b != c:
                raise GpmeError(f"forcing pieces must tile the time axis (gap/overlap at {b} vs {c})")
        for a, b, _ in pieces:
            if not b > a:
                raise GpmeError(f"empty forcing piece [{a}, {b}]")
        return cls("piecewise_constant", pieces=pieces)

    @classmethod
    def sampled(cls, fn: Callable[[float], NodeFunction]) -> "Forcing":
        return cls("sampled", fn=fn)

    @property
    def end(self) -> float:
        return self.pieces[-1][1] if self.kind == "piecewise_constant" else math.inf

    def breakpoints(self) -> list[float]:
        if self.kind != "piecewise_constant":
            return []
        return [a for a, _, _ in self.pieces[1:]]

    def __call__(self, t: float, graph) -> NodeFunction:
        if self.kind == "zero":
            return NodeFunction.zero(graph)
        if self.kind == "constant":
            return self.value.with_graph(graph)
        if self.kind == "sampled":
            return self.fn(t).with_graph(graph)
        if t > self.end:
            raise GpmeError(f"forcing is undefined at t = {t} (pieces end at {self.end})")
        ends = [b for _, b, _ in self.pieces]
        k = min(bisect.bisect_left(ends, t), len(self.pieces) - 1)
        return self.pieces[k][2].with_graph(graph)

    def sign(self, grid=None, graph=None) -> int:
        """+1 if f >= 0 throughout, -1 if f <= 0, 0 if it changes sign.

        Sampled forcings are only inspected on ``grid``.
        """
        if self.kind == "zero":
            return 1
        if self.kind == "constant":
            vals = [self.value]
        elif self.kind == "piecewise_constant":
            vals = [f for _, _, f in self.pieces]
        else:
            vals = [self.fn(t) for t in (grid or [])]
        if all(v.is_nonnegative() for v in vals):
            return 1
        if all(v.is_nonpositive() for v in vals):
            return -1
        return 0


@dataclass
class EpsilonDiscretization:
    epsilon: float
    grid: list[float]
    f_samples: list[NodeFunction]
    forcing_error: float
    T: float

    @property
    def steps(self) -> list[float]:
        return [b - a for a, b in zip(self.grid, self.grid[1:])]


@dataclass
class EvolutionResult:
    discretization: EpsilonDiscretization
    states: list[NodeFunction]
    per_step_diagnostics: list[dict]
    delta_estimate: list[float] | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def grid(self) -> list[float]:
        return self.discretization.grid

    def at(self, t: float) -> NodeFunction:
        """Piecewise constant trajectory: u_0 at t = 0, u_k on (t_{k-1}, t_k]."""
        grid = self.grid
        if t <= 0:
            return self.states[0]
        k = bisect.bisect_left(grid, t)
        if k >= len(grid):
            raise GpmeError(f"t = {t} lies beyond the last grid time {grid[-1]}")
        return self.states[k]

    def to_dict(self) -> dict:
        return {
            "grid": self.grid,
            "epsilon": self.discretization.epsilon,
            "forcing_error": self.discretization.forcing_error,
            "states": [s.to_dict() for s in self.states],
            "steps": self.per_step_diagnostics,
            "delta_estimate": self.delta_estimate,
            "diagnostics": self.diagnostics,
        }


MAX_SAMPLING_HALVINGS = 20


def _forcing_error(f: Forcing, grid, samples, graph) -> float:
    """sum_k int_{t_{k-1}}^{t_k} ||f(t) - f_k||_1 dt: exact (zero) for piecewise
    constant forcing aligned with the grid, midpoint estimate for sampled forcing."""
    if f.kind != "sampled":
        return 0.0
    terms = []
    for (a, b), fk in zip(zip(grid, grid[1:]), samples):
        terms.append((b - a) * norm(f(0.5 * (a + b), graph) - fk, 1))
    return math.fsum(terms)


def discretization_on_grid(f: Forcing, grid: list[float], eps: float, T: float, graph) -> EpsilonDiscretization:
    """Sample ``f`` at the right endpoints of an explicit grid 0 = t_0 < ... < t_n = T."""
    if grid[0] != 0.0 or grid[-1] != T:
        raise GpmeError("grid must start at 0 and end at T")
    if any(not b > a for a, b in zip(grid, grid[1:])):
        raise GpmeError("grid must be strictly increasing")
    if any(b - a > eps * (1 + 1e-12) for a, b in zip(grid, grid[1:])):
        raise GpmeError(f"grid has a step larger than eps = {eps}")
    samples = [f(t, graph) for t in grid[1:]]
    err = _forcing_error(f, grid, samples, graph)
    if err > eps:
        raise GpmeError(f"forcing sampling error {err:.3e} exceeds eps = {eps}; use a smaller eps")
    return EpsilonDiscretization(eps, grid, samples, err, T)


def discretize(f: Forcing, T: float, eps: float, graph=None) -> EpsilonDiscretization:
    """Uniform grid with n = ceil(T/eps) steps, refined at the forcing's breakpoints."""
    if not (T > 0 and math.isfinite(T)):
        raise GpmeError(f"T must be positive and finite, got {T}")
    if not eps > 0:
        raise GpmeError(f"eps must be positive, got {eps}")
    if f.kind == "piecewise_constant" and f.end < T:
        raise GpmeError(f"forcing pieces end at {f.end} < T = {T}")
    n = max(1, math.ceil(T / eps - 1e-12))
    grid = {T * k / n for k in range(n)} | {T}
    grid |= {b for b in f.breakpoints() if 0 < b < T}
    grid = sorted(grid)
    if f.kind == "sampled":
        # steps <= eps alone do not bound the sampling error; halve until it does
        for _ in range(MAX_SAMPLING_HALVINGS):
            samples = [f(t, graph) for t in grid[1:]]
            if _forcing_error(f, grid, samples, graph) <= eps:
                break
            grid = sorted(set(grid) | {0.5 * (a + b) for a, b in zip(grid, grid[1:])})
    return discretization_on_grid(f, grid, eps, T, graph)


def refine(d: EpsilonDiscretization, f: Forcing, graph=None) -> EpsilonDiscretization:
    """Halve every step; the refined grid contains the old one."""
    grid = [d.grid[0]]
    for a, b in zip(d.grid, d.grid[1:]):
        grid += [0.5 * (a + b), b]
    return discretization_on_grid(f, grid, 0.5 * d.epsilon, d.T, graph)


def _forcing_values(f: Forcing, grid, graph) -> list[NodeFunction]:
    if f.kind == "zero":
        return []
    if f.kind == "constant":
        return [f.value]
    if f.kind == "piecewise_constant":
        return [v for _, _, v in f.pieces]
    return [f(t, graph) for t in (grid or [])]


def check_hypotheses(graph, nl: Nonlinearity, u0: NodeFunction, f: Forcing, grid=None) -> dict:
    """Case split of the existence theorem: same-signed data, or one of H1/H2/H3."""
    data = [u0] + _forcing_values(f, grid, graph)
    definite = all(d.is_nonnegative() for d in data) or all(d.is_nonpositive() for d in data)
    flags = require_hypotheses(graph, nl, definite, "data (u0 or f)")
    return {"sign_definite": definite, "hypotheses": flags}


def step(G, nl: Nonlinearity, u_prev: NodeFunction, lam_k: float, f_k: NodeFunction,
         **solver_kw) -> ResolventSolution:
    """One implicit Euler step: (id + lam_k Delta Phi) u_k = u_prev + lam_k f_k."""
    if not lam_k > 0:
        raise GpmeError(f"time step must be positive, got {lam_k}")
    g = (u_prev + lam_k * f_k).with_graph(G).canonicalize()
    p = ResolventProblem(G, nl, lam_k, g)
    if isinstance(G, Graph):
        kw = {k: v for k, v in solver_kw.items() if k in ("tol", "scalar_tol", "max_sweeps")}
        return solve_finite(p, **kw)
    return solve_exhaustion(p, **solver_kw)


def step_residual(G: Graph, nl: Nonlinearity, u_prev: NodeFunction, u_k: NodeFunction,
                  lam_k: float, f_k: NodeFunction) -> float:
    """|| (u_k - u_prev)/lam_k + Delta Phi u_k - f_k ||_1 on a finite graph."""
    from .laplacian import LaplacianContext
    ctx = LaplacianContext(G)
    uk = u_k.to_array(G.nodes)
    r = (uk - u_prev.to_array(G.nodes)) / lam_k + ctx.array(np.array([nl.phi(s) for s in uk])) \
        - f_k.to_array(G.nodes)
    return math.fsum(np.abs(r) * G.mu)


def run_discretization(G, nl: Nonlinearity, u0: NodeFunction, d: EpsilonDiscretization,
                       **solver_kw) -> EvolutionResult:
    """Run implicit Euler on a given grid."""
    states = [u0.with_graph(G).canonicalize()]
    diags = []
    for k, (lam_k, f_k) in enumerate(zip(d.steps, d.f_samples), start=1):
        try:
            sol = step(G, nl, states[-1], lam_k, f_k, **solver_kw)
        except ConvergenceError as exc:
            raise ConvergenceError(f"step {k}: {exc}", exc.best_residual, exc.history) from exc
        states.append(sol.u.canonicalize())
        info = {"k": k, "t": d.grid[k], **sol.summary()}
        diags.append(info)
    return EvolutionResult(d, states, diags)


def evolve(G, nl: Nonlinearity, u0: NodeFunction, f: Forcing, T: float, eps: float,
           **solver_kw) -> EvolutionResult:
    """eps-approximate solution on the canonical eps-discretization."""
    d = discretize(f, T, eps, G)
    hyp = check_hypotheses(G, nl, u0, f, d.grid)
    res = run_discretization(G, nl, u0, d, **solver_kw)
    res.diagnostics.update(hyp)
    return res


def trajectory_distance(coarse: EvolutionResult, fine: EvolutionResult) -> float:
    """sup over the coarse grid times of ||u_fine(t) - u_coarse(t)||_1."""
    return max(norm(fine.at(t) - coarse.at(t), 1) for t in coarse.grid)


def evolve_mild(G, nl: Nonlinearity, u0: NodeFunction, f: Forcing, T: float, eps: float,
                tol: float, max_halvings: int = 10, **solver_kw) -> EvolutionResult:
    """Halve eps until consecutive trajectories agree to ``tol`` at the coarse grid times.

    The returned result is the finest trajectory; ``delta_estimate`` holds the
    observed sequence of differences.
    """
    d = discretize(f, T, eps, G)
    hyp = check_hypotheses(G, nl, u0, f, d.grid)
    prev = run_discretization(G, nl, u0, d, **solver_kw)
    history = []
    for _ in range(max_halvings):
        d = refine(d, f, G)
        cur = run_discretization(G, nl, u0, d, **solver_kw)
        history.append(trajectory_distance(prev, cur))
        prev = cur
        if history[-1] <= tol:
            cur.delta_estimate = history
            cur.diagnostics.update(hyp)
            cur.diagnostics["checked"] = (
                "sup over coarse grid times of the l1 distance between consecutive "
                "halvings of one grid family")
            return cur
    raise ConvergenceError(f"mild refinement did not reach tol = {tol} in {max_halvings} halvings",
                           best_residual=min(history), history=history)


def contraction_gap(r1: EvolutionResult, r2: EvolutionResult, f1: Forcing | None = None,
                    f2: Forcing | None = None) -> float:
    """max over grid pairs t1 < t2 of
    ||u(t2) - u^(t2)|| - ||u(t1) - u^(t1)|| - int_{t1}^{t2} ||f1 - f2|| dt.

    The forcing integral is evaluated on the shared grid from the sampled
    values (exact for piecewise constant forcing aligned with the grid).
    """
    g1, g2 = r1.grid, r2.grid
    if len(g1) != len(g2) or any(a != b for a, b in zip(g1, g2)):
        raise GpmeError("contraction_gap needs results on the same grid")
    dist = np.array([norm(a - b.with_graph(a.graph), 1) for a, b in zip(r1.states, r2.states)])
    steps = r1.discretization.steps
    fd = [lam * norm(a - b.with_graph(a.graph), 1)
          for lam, a, b in zip(steps, r1.discretization.f_samples, r2.discretization.f_samples)]
    cum = np.concatenate([[0.0], np.cumsum(fd)])
    # gap(i, j) = dist[j] - dist[i] - (cum[j] - cum[i]) for i < j
    h = dist - cum
    best = -math.inf
    run_min = h[0]
    for j in range(1, len(h)):
        best = max(best, h[j] - run_min)
        run_min = min(run_min, h[j])
    return float(best) if len(h) > 1 else 0.0


def classic_regime_check(G, nl: Nonlinearity) -> tuple[bool, dict]:
    """Whether sup Deg < infinity and Phi is continuous on l1 are certified.

    In that regime the mild solution is a classic one (for continuous f).
    """
    if isinstance(G, Graph):
        return True, {"sup_Deg": float(G.Deg.max()) if len(G) else 0.0,
                      "note": "finite graph: both conditions hold trivially; mild = classic"}
    if G.uniform_deg_bound is None:
        return False, {"note": "unverifiable: no uniform Deg bound asserted for this lazy graph"}
    if nl.global_lipschitz is not None:
        why = "phi globally Lipschitz"
    elif nl.locally_lipschitz and G.h2:
        why = "phi Lipschitz on bounded sets and inf mu > 0"
    else:
        return False, {"sup_Deg": G.uniform_deg_bound,
                       "note": "continuity of Phi on l1 not certified"}
    return True, {"sup_Deg": G.uniform_deg_bound,
                  "note": f"sup Deg <= {G.uniform_deg_bound} and {why}; mild = classic "
                          "(flags verified on truncation only)"}


# -- I/O ---------------------------------------------------------------------

def forcing_from_json(data, graph) -> Forcing:
    from .functions import function_from_json
    if data in ("zero", None):
        return Forcing.zero()
    kind = data.get("kind")
    if kind == "zero":
        return Forcing.zero()
    if kind == "constant":
        return Forcing.constant(function_from_json(data["values"], graph))
    if kind == "piecewise_constant":
        return Forcing.piecewise([(p["t_start"], p["t_end"], function_from_json(p["values"], graph))
                                  for p in data["pieces"]])
    raise GpmeError(f"unknown forcing kind {kind!r}")


def load_forcing(path_or_zero, graph) -> Forcing:
    if path_or_zero in (None, "zero"):
        return Forcing.zero()
    with open(path_or_zero) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GpmeError(f"forcing file is not valid JSON: {exc}") from exc
    try:
        return forcing_from_json(data, graph)
    except (KeyError, TypeError, AttributeError) as exc:
        raise GpmeError(f"malformed forcing file: {exc}") from exc
