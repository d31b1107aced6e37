"""Exception hierarchy."""


class ProxSplitError(Exception):
    """Base class for all errors raised by proxsplit."""


class UsageError(ProxSplitError, ValueError):
    """Bad arguments: dimension mismatch, out-of-range parameter, bad start point."""


class RankDeficient(ProxSplitError):
    """A matrix required to have full column rank does not."""


class NumericalFailure(ProxSplitError):
    """An internal numerical routine failed (e.g. simplex cycling guard hit)."""


class OracleError(ProxSplitError):
    """A function oracle was queried outside its contract or returned NaN."""


class LineSearchStalled(ProxSplitError):
    """Backtracking exceeded its trial budget.

    Under convexity and differentiability the search terminates finitely, so
    this points at a non-convex or buggy oracle.
    """


class InconsistentOptimality(ProxSplitError):
    """The supplied point violates first-order optimality beyond tolerance."""


class InsufficientData(ProxSplitError):
    """Too few usable iterates to estimate a convergence rate."""
