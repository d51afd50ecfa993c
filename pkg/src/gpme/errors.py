"""Exception types raised across the package."""


class GpmeError(Exception):
    """Base class for all library errors."""


class GraphError(GpmeError, ValueError):
    """Malformed graph data or an unknown node id."""


class TruncationError(GpmeError):
    """A quantity would need infinitely many neighbors to be evaluated."""


class HypothesisError(GpmeError):
    """The problem lies outside the hypotheses under which a solution is known.

    ``hypothesis`` names the violated condition, e.g. ``"sign condition"`` or
    ``"H1/H2/H3"``.
    """

    def __init__(self, message, hypothesis):
        super().__init__(message)
        self.hypothesis = hypothesis


class ConvergenceError(GpmeError):
    """An iterative procedure stopped before meeting its tolerance."""

    def __init__(self, message, best_residual=None, history=None):
        super().__init__(message)
        self.best_residual = best_residual
        self.history = list(history) if history is not None else []
