"""Function oracles for composite objectives ``F = f + g``.

``f`` is the smooth part, queried for values and gradients; ``g`` is the
prox-friendly part, queried for values and proximal points.  Values are
extended reals: ``math.inf`` marks points outside the domain, which is how
the line search detects that a trial step left ``dom f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .errors import OracleError, UsageError

__all__ = [
    "SmoothOracle",
    "ProxOracle",
    "CompositeProblem",
    "soft_threshold",
    "project_nonneg",
    "prox_of",
    "l1_norm",
    "nonneg_indicator",
    "zero_function",
    "quadratic",
]


def _extended(value, what):
    v = float(value)
    if math.isnan(v):
        raise OracleError(f"{what} returned NaN")
    if v == -math.inf:
        raise OracleError(f"{what} returned -inf")
    return v


@dataclass(frozen=True)
class SmoothOracle:
    """Smooth convex term: value (``inf`` off-domain) and gradient."""

    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    lipschitz_constant: float | None = None
    name: str = "f"

    def __call__(self, x):
        return _extended(self.value(x), self.name)

    def gradient(self, x):
        try:
            gx = np.asarray(self.grad(x), dtype=float)
        except (ArithmeticError, ValueError) as exc:
            raise OracleError(f"gradient of {self.name} failed: {exc}") from exc
        if not np.all(np.isfinite(gx)):
            raise OracleError(f"gradient of {self.name} is not finite at the query point")
        return gx


@dataclass(frozen=True)
class ProxOracle:
    """Prox-friendly convex term: value and ``prox(z, alpha)``."""

    value: Callable[[np.ndarray], float]
    prox: Callable[[np.ndarray, float], np.ndarray]
    name: str = "g"

    def __call__(self, x):
        return _extended(self.value(x), self.name)


@dataclass(frozen=True)
class CompositeProblem:
    f: SmoothOracle
    g: ProxOracle
    dimension: int

    def objective(self, x):
        fx = self.f(x)
        if fx == math.inf:
            return math.inf
        return fx + self.g(x)


def soft_threshold(z, lam):
    """Componentwise ``sign(z) * max(|z| - lam, 0)``."""
    if lam < 0:
        raise UsageError("threshold must be nonnegative")
    return kernels.soft_threshold(np.ascontiguousarray(z, dtype=float), float(lam))


def project_nonneg(z):
    """Euclidean projection onto the nonnegative orthant."""
    return kernels.project_nonneg(np.ascontiguousarray(z, dtype=float))


def prox_of(g, z, alpha):
    """Proximal point of ``alpha * g`` at ``z``."""
    if not alpha > 0:
        raise UsageError(f"prox parameter must be positive, got {alpha}")
    z = np.ascontiguousarray(z, dtype=float)
    try:
        p = np.asarray(g.prox(z, float(alpha)), dtype=float)
    except OracleError:
        raise
    except Exception as exc:
        raise OracleError(f"prox of {g.name} failed: {exc}") from exc
    if p.shape != z.shape or not np.all(np.isfinite(p)):
        raise OracleError(f"prox of {g.name} returned an invalid point")
    return p


# ---------------------------------------------------------------------------
# built-in terms
# ---------------------------------------------------------------------------

def l1_norm(mu):
    """``mu * ||x||_1`` with the soft-threshold prox."""
    mu = float(mu)
    if mu < 0:
        raise UsageError("l1 weight must be nonnegative")

    def value(x):
        return mu * float(np.sum(np.abs(x)))

    def prox(z, alpha):
        return kernels.soft_threshold(z, alpha * mu)

    return ProxOracle(value, prox, name=f"{mu:g}*l1")


def nonneg_indicator():
    """Indicator of the nonnegative orthant; its prox is the projection."""

    def value(x):
        return 0.0 if np.all(np.asarray(x) >= 0.0) else math.inf

    def prox(z, alpha):
        return kernels.project_nonneg(z)

    return ProxOracle(value, prox, name="indicator(R+)")


def zero_function():
    """``g = 0``; the prox is the identity."""
    return ProxOracle(lambda x: 0.0, lambda z, alpha: np.array(z, dtype=float), name="0")


def quadratic(H, c=None, const=0.0):
    """Smooth ``0.5 x'Hx + c'x + const`` for symmetric positive semidefinite ``H``."""
    H = np.atleast_2d(np.asarray(H, dtype=float))
    c = np.zeros(H.shape[0]) if c is None else np.asarray(c, dtype=float)
    lip = float(np.max(np.linalg.eigvalsh(H))) if H.size else 0.0

    def value(x):
        return 0.5 * float(x @ H @ x) + float(c @ x) + const

    def grad(x):
        return H @ x + c

    return SmoothOracle(value, grad, lipschitz_constant=lip, name="quadratic")
