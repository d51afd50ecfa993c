"""Scalar nonlinearities phi with inverse psi, and their nodewise extensions."""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from typing import Callable, Mapping

from .errors import GpmeError
from .functions import NodeFunction


@dataclass(frozen=True)
class Nonlinearity:
    """Strictly increasing phi with phi(0) = 0, its inverse psi and optional derivatives.

    ``family`` is ``"power_law"`` (with exponent ``m``) or ``"custom"``.
    ``global_lipschitz`` is a Lipschitz constant of phi on all of R, if one exists.
    """

    phi: Callable[[float], float]
    psi: Callable[[float], float]
    phi_prime: Callable[[float], float] | None = None
    psi_prime: Callable[[float], float] | None = None
    family: str = "custom"
    m: float | None = None
    global_lipschitz: float | None = None
    locally_lipschitz: bool = False
    spec: Mapping | None = None

    @property
    def regime(self) -> str:
        if self.m is None:
            return "custom"
        return "heat" if self.m == 1 else ("PME" if self.m > 1 else "FDE")

    @property
    def linear(self) -> bool:
        return self.m == 1


def _spow(s: float, a: float) -> float:
    """s |s|^(a-1), the odd power."""
    if s == 0.0:
        return 0.0
    return math.copysign(abs(s) ** a, s)


def power_law(m: float) -> Nonlinearity:
    """phi(s) = s|s|^(m-1): PME for m > 1, fast diffusion for m < 1, heat for m = 1."""
    m = float(m)
    if not (m > 0 and math.isfinite(m)):
        raise GpmeError(f"power law exponent must be positive, got {m}")
    if m == 1:
        ident = lambda s: float(s)  # noqa: E731
        one = lambda s: 1.0  # noqa: E731
        return Nonlinearity(ident, ident, one, one, "power_law", 1.0, 1.0, True,
                            {"family": "power_law", "m": 1.0})
    inv = 1.0 / m

    def phi(s):
        return _spow(s, m)

    def psi(s):
        return _spow(s, inv)

    def phi_prime(s):
        return m * abs(s) ** (m - 1) if s != 0 else (0.0 if m > 1 else math.inf)

    def psi_prime(s):
        return inv * abs(s) ** (inv - 1) if s != 0 else (0.0 if m < 1 else math.inf)

    return Nonlinearity(phi, psi, phi_prime, psi_prime, "power_law", m, None, m >= 1,
                        {"family": "power_law", "m": m})


def extend(nl: Nonlinearity, u: NodeFunction) -> NodeFunction:
    """Canonical nodewise extension (Phi u)(x) = phi(u(x))."""
    return u.map(nl.phi)


def extend_inverse(nl: Nonlinearity, v: NodeFunction) -> NodeFunction:
    return v.map(nl.psi)


# -- custom nonlinearities from expression strings -----------------------

_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)


def _check_tree(node):
    for sub in ast.walk(node):
        if isinstance(sub, (ast.Expression, ast.Load, ast.BinOp, ast.UnaryOp,
                            ast.USub, ast.UAdd) + _BINOPS):
            continue
        if isinstance(sub, ast.Constant) and isinstance(sub.value, (int, float)):
            continue
        if isinstance(sub, ast.Name) and sub.id == "s":
            continue
        if isinstance(sub, ast.Name) and sub.id in ("abs", "sgn"):
            continue
        if isinstance(sub, ast.Call) and isinstance(sub.func, ast.Name) \
                and sub.func.id in ("abs", "sgn") and len(sub.args) == 1 and not sub.keywords:
            continue
        raise GpmeError(f"unsupported syntax in expression: {ast.dump(sub)[:60]}")


def _eval(node, s: float, ds: float) -> tuple[float, float]:
    """Value and derivative (forward mode) of the expression tree at s."""
    if isinstance(node, ast.Expression):
        return _eval(node.body, s, ds)
    if isinstance(node, ast.Constant):
        return float(node.value), 0.0
    if isinstance(node, ast.Name):
        return s, ds
    if isinstance(node, ast.UnaryOp):
        a, da = _eval(node.operand, s, ds)
        return (-a, -da) if isinstance(node.op, ast.USub) else (a, da)
    if isinstance(node, ast.Call):
        a, da = _eval(node.args[0], s, ds)
        sg = float((a > 0) - (a < 0))
        if node.func.id == "abs":
            return abs(a), sg * da
        return sg, 0.0
    a, da = _eval(node.left, s, ds)
    b, db = _eval(node.right, s, ds)
    op = node.op
    if isinstance(op, ast.Add):
        return a + b, da + db
    if isinstance(op, ast.Sub):
        return a - b, da - db
    if isinstance(op, ast.Mult):
        return a * b, da * b + a * db
    if isinstance(op, ast.Div):
        return a / b, (da * b - a * db) / (b * b)
    # power
    if a == 0.0:
        if b > 0:
            val = 0.0
            der = (b * da if b == 1 else (0.0 if b > 1 else math.inf)) if db == 0 else 0.0
            return val, der
        raise ZeroDivisionError("0 to a non-positive power")
    val = a ** b
    if isinstance(val, complex):
        raise GpmeError("negative base with fractional exponent; use abs()")
    der = b * a ** (b - 1) * da
    if db != 0:
        der += val * math.log(a) * db
    return val, der


class Expression:
    """Arithmetic expression in the variable s: + - * / ^, abs(), sgn()."""

    def __init__(self, text: str):
        self.text = text
        try:
            tree = ast.parse(text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise GpmeError(f"cannot parse expression {text!r}: {exc.msg}") from exc
        _check_tree(tree)
        self._tree = tree

    def __call__(self, s: float) -> float:
        return _eval(self._tree, float(s), 0.0)[0]

    def derivative(self, s: float) -> float:
        return _eval(self._tree, float(s), 1.0)[1]

    def __repr__(self):
        return f"Expression({self.text!r})"


def custom(phi: str, psi: str, global_lipschitz: float | None = None,
           locally_lipschitz: bool = False, check: bool = True) -> Nonlinearity:
    """Nonlinearity from expression strings; psi must be supplied by the user."""
    f, g = Expression(phi), Expression(psi)

    def psi_prime(v):
        d = f.derivative(g(v))
        return 1.0 / d if d != 0 else math.inf

    nl = Nonlinearity(f, g, f.derivative, psi_prime, "custom", None, global_lipschitz,
                      locally_lipschitz or global_lipschitz is not None,
                      {"family": "custom", "phi": phi, "psi": psi})
    if check:
        check_nonlinearity(nl)
    return nl


def check_nonlinearity(nl: Nonlinearity, samples=None, rtol: float = 1e-12) -> None:
    """Sample the structural requirements: phi(0) = 0, strict monotonicity, psi(phi(s)) = s."""
    if nl.phi(0.0) != 0.0:
        raise GpmeError("phi(0) must be exactly 0")
    if samples is None:
        samples = sorted({0.0} | {sg * 10.0 ** e for e in range(-3, 4) for sg in (-1, 1)}
                         | {sg * c for c in (0.37, 1.5, 2.9) for sg in (-1, 1)})
    vals = [nl.phi(s) for s in samples]
    for (s1, a), (s2, b) in zip(zip(samples, vals), zip(samples[1:], vals[1:])):
        if not a < b:
            raise GpmeError(f"phi is not strictly increasing between {s1} and {s2}")
    for s in samples:
        back = nl.psi(nl.phi(s))
        if abs(back - s) > rtol * abs(s):
            raise GpmeError(f"psi(phi({s})) = {back}, psi is not the inverse of phi")


def from_config(cfg) -> Nonlinearity:
    """Build from {"family": "power_law", "m": 2} or {"family": "custom", "phi": ..., "psi": ...}."""
    if isinstance(cfg, str):
        import json
        try:
            cfg = json.loads(cfg)
        except json.JSONDecodeError as exc:
            raise GpmeError(f"phi spec is not valid JSON: {exc}") from exc
    if not isinstance(cfg, Mapping):
        raise GpmeError("phi spec must be a JSON object")
    family = cfg.get("family")
    if family == "power_law":
        if "m" not in cfg:
            raise GpmeError("power_law spec needs an exponent m")
        return power_law(cfg["m"])
    if family == "custom":
        try:
            return custom(cfg["phi"], cfg["psi"], cfg.get("global_lipschitz"),
                          bool(cfg.get("locally_lipschitz", False)))
        except KeyError as exc:
            raise GpmeError(f"custom phi spec is missing {exc}") from exc
    raise GpmeError(f"unknown nonlinearity family {family!r}")
