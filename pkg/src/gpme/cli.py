"""Command-line driver: ``gpme resolve | evolve | check | emit-plot``.

Exit codes: 0 success, 1 domain refusal (hypotheses not met, solver did not
converge), 2 bad input (unreadable file, malformed JSON, out-of-range
parameter, unknown suite). Failures print one JSON object
``{"code", "reason", "context"}`` on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import checks
from .errors import ConvergenceError, GpmeError, HypothesisError, TruncationError
from .evolution import EvolutionResult, classic_regime_check, evolve, evolve_mild, load_forcing
from .families import FAMILIES, make_family
from .functions import NodeFunction, load_function
from .graph import Graph, load_graph
from .nonlinearity import Nonlinearity, from_config
from .resolvent import DEFAULT_TOL, ResolventProblem, solve

log = logging.getLogger("gpme")

LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}

DEFAULT_CASES = {
    "accretivity": 100,
    "contractivity": 100,
    "comparison": 100,
    "mass": 50,
    "exhaustion": 3,
    "heat-order": 10,
}


class InputError(Exception):
    """Raised for anything that maps to exit code 2."""

    def __init__(self, reason, **context):
        super().__init__(reason)
        self.context = context


@dataclass
class ScenarioConfig:
    graph: object
    nl: Nonlinearity
    kind: str
    params: dict = field(default_factory=dict)
    out: str | None = None


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, tuple)):
        return list(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _dump(data) -> str:
    return json.dumps(data, default=_jsonable, indent=1) + "\n"


def _write(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}", path=path) from exc


def _positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise InputError(f"{name} must be positive and finite", **{name: value})
    return value


def _load(loader, path, what):
    try:
        return loader(path)
    except FileNotFoundError as exc:
        raise InputError(f"{what} file not found", path=path) from exc
    except OSError as exc:
        raise InputError(f"cannot read {what} file: {exc.strerror}", path=path) from exc
    except GpmeError as exc:
        raise InputError(f"malformed {what}: {exc}", path=path) from exc


def build_graph(args):
    if args.graph and args.family:
        raise InputError("give either --graph or --family, not both")
    if args.graph:
        return _load(load_graph, args.graph, "graph")
    if args.family:
        try:
            params = json.loads(args.family_params) if args.family_params else {}
            return make_family(args.family, params)
        except json.JSONDecodeError as exc:
            raise InputError(f"family params are not valid JSON: {exc}") from exc
        except (GpmeError, TypeError) as exc:
            raise InputError(str(exc), family=args.family) from exc
    raise InputError("one of --graph or --family is required")


def build_nl(spec: str) -> Nonlinearity:
    if os.path.isfile(spec):
        with open(spec) as fh:
            spec = fh.read()
    try:
        return from_config(spec)
    except (GpmeError, TypeError, ValueError) as exc:
        raise InputError(f"bad phi spec: {exc}", phi=spec) from exc


def _function(path, graph, what) -> NodeFunction:
    return _load(lambda p: load_function(p, graph), path, what)


# -- subcommands ------------------------------------------------------------------

def cmd_resolve(args) -> int:
    graph = build_graph(args)
    nl = build_nl(args.phi)
    lam = _positive("lambda", args.lam)
    tol = _positive("tol", args.tol) if args.tol is not None else None
    g = _function(args.g, graph, "g")
    cfg = ScenarioConfig(graph, nl, "resolve", {"lambda": lam, "tol": tol}, args.out)
    kw = {}
    if isinstance(graph, Graph):
        if tol is not None:
            kw["tol"] = tol
    else:
        kw["max_level"] = args.max_level
        if tol is not None:
            kw["tol"] = tol
    log.info("resolve: lambda=%g on %s", lam, getattr(graph, "name", "graph"))
    sol = solve(ResolventProblem(cfg.graph, nl, lam, g), **kw)
    out = {"u": sol.u.to_dict(), "residual": sol.residual_l1,
           "diagnostics": {**sol.summary(), **sol.diagnostics}}
    _write(_dump(out), cfg.out)
    return 0


def _csv_stream(result: EvolutionResult) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["t", "node", "value"])
    for t, state in zip(result.grid, result.states):
        for x, val in sorted(state.items(), key=lambda kv: str(kv[0])):
            wr.writerow([repr(float(t)), x, repr(float(val))])
    return buf.getvalue()


def cmd_evolve(args) -> int:
    graph = build_graph(args)
    nl = build_nl(args.phi)
    T = _positive("T", args.T)
    eps = _positive("eps", args.eps)
    u0 = _function(args.u0, graph, "u0")
    forcing = _load(lambda p: load_forcing(p, graph), args.forcing, "forcing")
    kw = {} if isinstance(graph, Graph) else {"max_level": args.max_level}
    if args.mild_tol is not None:
        res = evolve_mild(graph, nl, u0, forcing, T, eps, _positive("mild_tol", args.mild_tol), **kw)
    else:
        res = evolve(graph, nl, u0, forcing, T, eps, **kw)
    classic, report = classic_regime_check(graph, nl)
    res.diagnostics["classic"] = classic
    res.diagnostics["classic_report"] = report
    _write(_dump(res.to_dict()), args.out)
    if args.csv:
        _write(_csv_stream(res), args.csv)
    return 0


def cmd_check(args) -> int:
    if args.suite not in checks.SUITES:
        raise InputError(f"unknown suite {args.suite!r}", choices=sorted(checks.SUITES))
    cases = DEFAULT_CASES[args.suite] if args.cases is None else args.cases
    if cases < 0:
        raise InputError("--cases must be nonnegative", cases=cases)
    res = checks.SUITES[args.suite](args.seed, cases)
    print(res.line())
    if args.suite == "heat-order" and res.extra.get("ratios"):
        orders = [math.log2(r) for r in res.extra["ratios"]]
        print(f"heat-order: measured order min={min(orders):.4f} max={max(orders):.4f}")
    for info in res.failures:
        print("  failure: " + json.dumps(info, default=_jsonable))
    return 0 if res.ok else 1


def cmd_emit_plot(args) -> int:
    """Turn a saved evolve/resolve JSON into a CSV stream."""
    try:
        with open(args.input) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {args.input}: {exc.strerror}", path=args.input) from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"result file is not valid JSON: {exc}", path=args.input) from exc
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    if isinstance(data, dict) and "grid" in data and "states" in data:
        wr.writerow(["t", "node", "value"])
        for t, state in zip(data["grid"], data["states"]):
            for x in sorted(state):
                wr.writerow([repr(float(t)), x, repr(float(state[x]))])
    elif isinstance(data, dict) and "u" in data:
        wr.writerow(["node", "value"])
        for x in sorted(data["u"]):
            wr.writerow([x, repr(float(data["u"][x]))])
    else:
        raise InputError("not an evolve or resolve result", path=args.input)
    _write(buf.getvalue(), args.out)
    return 0


# -- parser -------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"usage: {message}", prog=self.prog)


def _graph_flags(p):
    p.add_argument("--graph", help="graph JSON file")
    p.add_argument("--family", help=f"named infinite family: {', '.join(sorted(FAMILIES))}")
    p.add_argument("--family-params", help='JSON, e.g. \'{"mu": {"kind": "geometric", ...}}\'')
    p.add_argument("--phi", required=True, help='JSON spec or file, e.g. \'{"family":"power_law","m":2}\'')
    p.add_argument("--max-level", type=int, default=200, help="exhaustion level cap (infinite graphs)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gpme", description="Generalized porous medium equation on weighted graphs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("resolve", help="solve (id + lam Delta Phi) u = g")
    _graph_flags(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--g", required=True, help="right-hand side JSON {node: value}")
    p.add_argument("--tol", type=float, default=None, help=f"residual tolerance (default {DEFAULT_TOL:g})")
    p.add_argument("--out", help="output JSON (default stdout)")
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("evolve", help="implicit Euler evolution up to time T")
    _graph_flags(p)
    p.add_argument("--u0", required=True, help="initial datum JSON {node: value}")
    p.add_argument("--forcing", default="zero", help="forcing JSON file or 'zero'")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--mild-tol", type=float, default=None,
                   help="refine eps until consecutive trajectories agree to this tolerance")
    p.add_argument("--out", help="output JSON (default stdout)")
    p.add_argument("--csv", help="also write a t,node,value CSV stream here")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("check", help="randomized invariant suite")
    p.add_argument("suite", help=f"one of {', '.join(checks.SUITES)}")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--cases", type=int, default=None)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("emit-plot", help="CSV stream from a saved result")
    p.add_argument("input")
    p.add_argument("--out", help="CSV output (default stdout)")
    p.set_defaults(func=cmd_emit_plot)
    return parser


def _fail(code: int, reason: str, context: dict) -> int:
    sys.stderr.write(json.dumps({"code": code, "reason": reason, "context": context},
                                default=_jsonable) + "\n")
    return code


def run(argv=None) -> int:
    level = os.environ.get("GPME_LOG", "quiet")
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.WARNING), stream=sys.stderr,
                        format="gpme %(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except InputError as exc:
        return _fail(2, str(exc), exc.context)
    except HypothesisError as exc:
        return _fail(1, f"sign-changing data requires {exc.hypothesis}",
                     {"hypothesis": exc.hypothesis, "detail": str(exc)})
    except ConvergenceError as exc:
        return _fail(1, "solver did not converge",
                     {"detail": str(exc), "best": exc.best_residual, "history": exc.history[-10:]})
    except TruncationError as exc:
        return _fail(1, "quantity needs infinitely many neighbors", {"detail": str(exc)})
    except GpmeError as exc:
        return _fail(2, str(exc), {})


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
