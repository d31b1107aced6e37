"""Builders for the concrete composite problems.

* Lasso: ``0.5 ||Ax - b||^2 + mu ||x||_1``
* generic l1-regularized smooth objective: ``f(x) + mu ||x||_1``
* Poisson / Kullback-Leibler: ``sum_i b_i log(b_i / (Ax)_i) + (Ax)_i - b_i``
  over ``x >= 0``, optionally plus ``mu_l1 * sum(x)`` (which equals
  ``mu_l1 ||x||_1`` on the feasible set).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import OracleError, UsageError
from .linalg import as_matrix, as_vector
from .oracles import (
    CompositeProblem,
    ProxOracle,
    SmoothOracle,
    l1_norm,
    nonneg_indicator,
)

__all__ = [
    "LassoInstance",
    "PoissonInstance",
    "lambda_max",
    "build_lasso",
    "build_l1_smooth",
    "build_poisson",
    "log_barrier_example",
]


@dataclass(frozen=True)
class LassoInstance:
    A: np.ndarray
    b: np.ndarray
    mu: float

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        b = as_vector(self.b, "b")
        if A.shape[0] != b.shape[0]:
            raise UsageError(f"A has {A.shape[0]} rows but b has length {b.shape[0]}")
        if not self.mu > 0:
            raise UsageError("mu must be positive")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "mu", float(self.mu))

    def objective(self, x):
        r = self.A @ x - self.b
        return 0.5 * float(r @ r) + self.mu * float(np.sum(np.abs(x)))


@dataclass(frozen=True)
class PoissonInstance:
    """Nonnegative ``A`` without zero rows and strictly positive ``b``.

    Zero columns are accepted; ``zero_columns`` lists them because the
    corresponding coordinates are unconstrained by the data.
    """

    A: np.ndarray
    b: np.ndarray
    mu_l1: float = 0.0

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        b = as_vector(self.b, "b")
        if A.shape[0] != b.shape[0]:
            raise UsageError(f"A has {A.shape[0]} rows but b has length {b.shape[0]}")
        if np.any(A < 0):
            raise UsageError("Poisson matrix must have nonnegative entries")
        if np.any(A.max(axis=1) <= 0):
            raise UsageError("Poisson matrix has a zero row")
        if np.any(b <= 0):
            raise UsageError("Poisson data b must be strictly positive")
        if self.mu_l1 < 0:
            raise UsageError("mu_l1 must be nonnegative")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "mu_l1", float(self.mu_l1))

    @property
    def zero_columns(self):
        return np.flatnonzero(self.A.max(axis=0) <= 0).tolist()


def lambda_max(A, max_iter=200, rtol=1e-10):
    """Largest eigenvalue of ``A^T A`` by power iteration."""
    A = as_matrix(A)
    v0 = np.random.default_rng(0).standard_normal(A.shape[1])
    v0 /= np.linalg.norm(v0)
    return float(kernels.power_iteration(A, v0, max_iter, rtol))


def build_lasso(inst):
    A, b = inst.A, inst.b

    def value(x):
        return kernels.lasso_value(A, b, x)

    def grad(x):
        return kernels.lasso_grad(A, b, x)

    lip = lambda_max(A) * (1.0 + 1e-6)
    f = SmoothOracle(value, grad, lipschitz_constant=lip, name="least-squares")
    return CompositeProblem(f, l1_norm(inst.mu), A.shape[1])


def build_l1_smooth(f, mu, dimension):
    return CompositeProblem(f, l1_norm(mu), int(dimension))


def build_poisson(inst):
    """KL data term with the nonnegativity constraint as ``g``.

    ``f`` is ``inf`` wherever some ``(Ax)_i <= 0``; it has no global
    Lipschitz gradient, so none is attached.
    """
    A, b, mu = inst.A, inst.b, inst.mu_l1

    def value(x):
        v = kernels.poisson_value(A, b, x)
        if mu and v != math.inf:
            v += mu * float(np.sum(x))
        return v

    def grad(x):
        y = A @ x
        if not np.all(y > 0):
            raise OracleError("KL gradient requested outside A x > 0")
        gx = kernels.poisson_grad(A, b, x)
        return gx + mu if mu else gx

    f = SmoothOracle(value, grad, lipschitz_constant=None, name="kullback-leibler")
    return CompositeProblem(f, nonneg_indicator(), A.shape[1])


def log_barrier_example():
    """Two-variable instance where the usual bounded-gradient hypotheses fail.

    ``f(x) = -log x1 - log x2`` on the open positive quadrant and ``g`` the
    indicator of ``{x >= 0 : x1 x2 >= 1}``.  ``F(2, 1) = -log 2``; the
    gradient ``(-1/x1, -1/x2)`` is unbounded on ``{F <= -log 2}``, which
    reaches arbitrarily close to the boundary of ``dom f``.  The projection
    onto the hyperbolic set has no closed form and is not provided: calling
    the prox raises :class:`OracleError`.
    """

    def f_value(x):
        if x[0] <= 0 or x[1] <= 0:
            return math.inf
        return -math.log(x[0]) - math.log(x[1])

    def f_grad(x):
        return np.array([-1.0 / x[0], -1.0 / x[1]])

    def g_value(x):
        return 0.0 if (x[0] >= 0 and x[1] >= 0 and x[0] * x[1] >= 1.0) else math.inf

    def g_prox(z, alpha):
        raise OracleError("projection onto {x1 x2 >= 1} is not implemented")

    f = SmoothOracle(f_value, f_grad, name="log-barrier")
    g = ProxOracle(g_value, g_prox, name="indicator(x1 x2 >= 1)")
    return CompositeProblem(f, g, 2)
