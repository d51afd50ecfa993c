"""Generalized porous medium equation on weighted graphs.

Finite nonlinear resolvent solves, Dirichlet exhaustion of infinite graphs,
implicit Euler mild solutions, and randomized checks of their invariants.
"""

from .errors import ConvergenceError, GpmeError, GraphError, HypothesisError, TruncationError
from .evolution import (EpsilonDiscretization, EvolutionResult, Forcing, classic_regime_check,
                        contraction_gap, discretize, evolve, evolve_mild, refine)
from .families import FAMILIES, make_family
from .functions import NodeFunction, bracket_plus, norm, sign_split
from .graph import (DirichletSubgraph, Graph, LazyGraph, connected_components, degree,
                    dirichlet_restrict, exhaustion, load_graph)
from .laplacian import LaplacianContext, accretivity_residual, apply, apply_all, apply_L
from .nonlinearity import Nonlinearity, custom, from_config, power_law
from .resolvent import (ResolventProblem, ResolventSolution, solve, solve_componentwise,
                        solve_exhaustion, solve_finite)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError", "GpmeError", "GraphError", "HypothesisError", "TruncationError",
    "EpsilonDiscretization", "EvolutionResult", "Forcing", "classic_regime_check",
    "contraction_gap", "discretize", "evolve", "evolve_mild", "refine",
    "FAMILIES", "make_family",
    "NodeFunction", "bracket_plus", "norm", "sign_split",
    "DirichletSubgraph", "Graph", "LazyGraph", "connected_components", "degree",
    "dirichlet_restrict", "exhaustion", "load_graph",
    "LaplacianContext", "accretivity_residual", "apply", "apply_all", "apply_L",
    "Nonlinearity", "custom", "from_config", "power_law",
    "ResolventProblem", "ResolventSolution", "solve", "solve_componentwise",
    "solve_exhaustion", "solve_finite",
]
