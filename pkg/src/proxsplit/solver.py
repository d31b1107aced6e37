"""Forward-backward splitting with warm-started Beck-Teboulle backtracking.

Iteration ``k`` computes ``alpha_k = LS(x^k, alpha_{k-1}, theta)`` with
``alpha_{-1} = sigma`` and sets ``x^{k+1} = prox_{alpha_k g}(x^k - alpha_k grad f(x^k))``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError
from .linalg import as_vector
from .linesearch import LineSearchConfig, search
from .problems import LassoInstance, PoissonInstance, build_lasso, build_poisson

__all__ = [
    "Status",
    "SolverConfig",
    "IterateRecord",
    "SolveResult",
    "solve",
    "ista_solve",
    "poisson_solve",
]


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERATIONS = "MaxIterations"
    DIVERGING = "Diverging"


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of one FBS run.

    ``reset_each_iteration`` restarts every line search at ``sigma`` instead
    of at the previous step size.  It is an experimental switch: the step
    size floor and the linear-rate results assume the warm start.
    """

    sigma: float = 1.0
    theta: float = 0.5
    tol: float = 1e-10
    max_iter: int = 100_000
    record_certificates: bool = True
    reference_point: np.ndarray | None = None
    divergence_norm: float = 1e12
    reset_each_iteration: bool = False
    max_trials: int = 200
    relative_slack: float = 1e-12
    keep_iterates: bool = False

    def __post_init__(self):
        if not self.sigma > 0:
            raise UsageError("sigma must be positive")
        if not 0.0 < self.theta < 1.0:
            raise UsageError("theta must lie in (0, 1)")
        if not self.tol > 0:
            raise UsageError("tol must be positive")
        if self.max_iter < 1:
            raise UsageError("max_iter must be positive")
        if not self.divergence_norm > 0:
            raise UsageError("divergence_norm must be positive")


@dataclass(slots=True)
class IterateRecord:
    k: int
    alpha_k: float
    objective: float
    residual: float
    descent_certificate: float
    fejer_certificate: float | None = None
    distance_to_reference: float | None = None


@dataclass
class SolveResult:
    status: Status
    final_point: np.ndarray
    final_objective: float
    log: list = field(default_factory=list)
    iterates: np.ndarray | None = field(default=None, repr=False)

    @property
    def iterations(self):
        return len(self.log)

    @property
    def final_residual(self):
        return self.log[-1].residual if self.log else math.nan


def solve(p, x0, cfg=SolverConfig()):
    """Run FBS on the composite problem ``p`` from ``x0``.

    Each record carries the per-step certificates::

        descent = F(x^k) - F(x^{k+1}) - ||x^{k+1} - x^k||^2 / (2 alpha_k)
        fejer   = ||x^k - xr||^2 - ||x^{k+1} - xr||^2 - 2 alpha_k (F(x^{k+1}) - F(xr))

    which are nonnegative in exact arithmetic.  ``xr`` is
    ``cfg.reference_point`` when given, otherwise the final point of the run
    (filled in after the loop).

    The run stops when ``||x^k - x^{k+1}|| / alpha_k <= tol`` (Converged),
    when ``||x^{k+1}||`` exceeds ``divergence_norm`` (Diverging) or after
    ``max_iter`` steps (MaxIterations).
    """
    x = as_vector(x0, "x0")
    if x.shape[0] != p.dimension:
        raise UsageError(f"x0 has length {x.shape[0]}, problem has dimension {p.dimension}")
    fx = p.f(x)
    gx = p.g(x)
    if not (math.isfinite(fx) and math.isfinite(gx)):
        raise UsageError("F(x0) is not finite; start inside dom f and dom g")
    ls_cfg = LineSearchConfig(cfg.theta, cfg.max_trials, cfg.relative_slack)
    ref = None if cfg.reference_point is None else as_vector(cfg.reference_point, "reference_point")
    F_ref = None if ref is None else p.objective(ref)
    store = cfg.keep_iterates or (cfg.record_certificates and ref is None)
    iterates = [x.copy()] if store else None

    log = []
    Fx = fx + gx
    alpha = cfg.sigma
    status = Status.MAX_ITERATIONS
    for k in range(cfg.max_iter):
        start = cfg.sigma if cfg.reset_each_iteration else alpha
        grad = p.f.gradient(x)
        out = search(p, x, start, ls_cfg, fx=fx, grad=grad)
        alpha = out.alpha
        x_new = out.trial_point
        f_new = out.trial_value
        F_new = f_new + p.g(x_new)
        step = x_new - x
        step_sq = float(step @ step)
        rec = IterateRecord(
            k=k,
            alpha_k=alpha,
            objective=Fx,
            residual=math.sqrt(step_sq) / alpha,
            descent_certificate=(Fx - F_new) - step_sq / (2.0 * alpha),
        )
        if cfg.record_certificates and ref is not None:
            d_old = x - ref
            d_new = x_new - ref
            rec.fejer_certificate = (
                float(d_old @ d_old) - float(d_new @ d_new) - 2.0 * alpha * (F_new - F_ref)
            )
            rec.distance_to_reference = math.sqrt(float(d_old @ d_old))
        log.append(rec)
        if store:
            iterates.append(x_new.copy())
        x, fx, Fx = x_new, f_new, F_new
        if np.linalg.norm(x) > cfg.divergence_norm:
            status = Status.DIVERGING
            break
        if rec.residual <= cfg.tol:
            status = Status.CONVERGED
            break

    stacked = np.array(iterates) if store else None
    if cfg.record_certificates and ref is None:
        _fill_fejer(log, stacked, x, Fx)
    return SolveResult(status, x, Fx, log, stacked if cfg.keep_iterates else None)


def _fill_fejer(log, iterates, xr, F_ref):
    diffs = iterates - xr
    dist_sq = np.einsum("ij,ij->i", diffs, diffs)
    for rec in log:
        k = rec.k
        F_next = log[k + 1].objective if k + 1 < len(log) else F_ref
        rec.fejer_certificate = float(dist_sq[k] - dist_sq[k + 1] - 2.0 * rec.alpha_k * (F_next - F_ref))
        rec.distance_to_reference = math.sqrt(float(dist_sq[k]))


def ista_solve(A, b, mu, x0=None, cfg=SolverConfig()):
    """FBS on ``0.5 ||Ax - b||^2 + mu ||x||_1`` (ISTA with backtracking)."""
    inst = LassoInstance(A, b, mu)
    if x0 is None:
        x0 = np.zeros(inst.A.shape[1])
    return solve(build_lasso(inst), x0, cfg)


def poisson_solve(A, b, x0=None, cfg=SolverConfig(), mu_l1=0.0):
    """FBS on the Kullback-Leibler objective over the nonnegative orthant.

    ``x0`` defaults to the all-ones vector and must satisfy ``x0 >= 0`` and
    ``A @ x0 > 0``.
    """
    inst = PoissonInstance(A, b, mu_l1)
    x0 = np.ones(inst.A.shape[1]) if x0 is None else as_vector(x0, "x0")
    if x0.shape[0] != inst.A.shape[1]:
        raise UsageError("x0 length does not match the number of columns of A")
    if np.any(x0 < 0) or not np.all(inst.A @ x0 > 0):
        raise UsageError("poisson start point needs x0 >= 0 and A @ x0 > 0")
    return solve(build_poisson(inst), x0, cfg)

