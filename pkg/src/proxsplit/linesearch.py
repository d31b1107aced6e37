"""Beck-Teboulle backtracking for the forward-backward step."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LineSearchStalled, UsageError
from .oracles import prox_of

__all__ = ["LineSearchConfig", "LineSearchOutcome", "forward_backward_point", "search"]


@dataclass(frozen=True)
class LineSearchConfig:
    theta: float = 0.5
    max_trials: int = 200
    relative_slack: float = 1e-12

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise UsageError(f"theta must lie in (0, 1), got {self.theta}")
        if self.max_trials < 1:
            raise UsageError("max_trials must be at least 1")
        if self.relative_slack < 0:
            raise UsageError("relative_slack must be nonnegative")


@dataclass(frozen=True)
class LineSearchOutcome:
    alpha: float
    trial_point: np.ndarray
    trials_used: int
    trial_value: float


def forward_backward_point(p, x, alpha, grad=None):
    """``prox_{alpha g}(x - alpha * grad f(x))``."""
    if not alpha > 0:
        raise UsageError(f"step size must be positive, got {alpha}")
    if grad is None:
        grad = p.f.gradient(x)
    return prox_of(p.g, x - alpha * grad, alpha)


def search(p, x, sigma, cfg=LineSearchConfig(), fx=None, grad=None):
    """Shrink ``alpha = sigma, sigma*theta, ...`` until the quadratic model bounds ``f``.

    A trial is accepted when::

        f(J) <= f(x) + <grad f(x), J - x> + ||x - J||^2 / (2 alpha)
                + relative_slack * (1 + |f(x)|)

    with ``J = prox_{alpha g}(x - alpha grad f(x))``.  A trial with
    ``f(J) = inf`` (outside the domain) always counts as rejected.
    ``fx`` and ``grad`` may be passed in to avoid recomputation.

    Raises
    ------
    LineSearchStalled
        After ``cfg.max_trials`` rejected trials.
    """
    if not sigma > 0:
        raise UsageError(f"initial step must be positive, got {sigma}")
    x = np.asarray(x, dtype=float)
    if fx is None:
        fx = p.f(x)
    if not math.isfinite(fx):
        raise UsageError("line search started outside the domain of f")
    if grad is None:
        grad = p.f.gradient(x)
    slack = cfg.relative_slack * (1.0 + abs(fx))
    sigma = float(sigma)
    for trial in range(1, cfg.max_trials + 1):
        alpha = sigma * cfg.theta ** (trial - 1)
        J = prox_of(p.g, x - alpha * grad, alpha)
        fJ = p.f(J)
        if fJ != math.inf:
            d = J - x
            model = fx + float(grad @ d) + float(d @ d) / (2.0 * alpha)
            if fJ <= model + slack:
                return LineSearchOutcome(alpha, J, trial, fJ)
    raise LineSearchStalled(
        f"no acceptable step after {cfg.max_trials} trials (last alpha {alpha:.3e})"
    )
