"""Post-solve analysis.

Lasso uniqueness certificates, strong subregularity of l1-regularized
problems, graphical-derivative membership for ``d(mu ||.||_1)`` and
linear-rate estimation from solver logs.

Index sets are 0-based throughout.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InconsistentOptimality, InsufficientData, NumericalFailure, UsageError
from .linalg import (
    DEFAULT_RANK_TOL,
    LpProblem,
    LpStatus,
    as_matrix,
    as_vector,
    column_rank,
    lp_solve,
    pseudo_inverse_apply,
)

__all__ = [
    "ActiveSets",
    "UniquenessReport",
    "SubregularityCertificate",
    "RateMetric",
    "RateVariant",
    "RateEstimate",
    "active_sets",
    "check_uniqueness",
    "solution_polytope_oracle",
    "check_strong_subregularity_l1",
    "graphical_derivative_membership",
    "estimate_rate",
    "rate_from_errors",
    "theoretical_q",
]

# LP optima of the cone tests are either 0 or >= 1 in exact arithmetic
# (a nonzero cone element can be rescaled into the unit box).
_LP_ZERO = 1e-9
_POLYTOPE_GAP = 1e-7
_NOISE_FLOOR = 1e-13


def _sign(v):
    return np.sign(v).astype(float)


# ---------------------------------------------------------------------------
# active sets
# ---------------------------------------------------------------------------

@dataclass
class ActiveSets:
    """Equicorrelation split of a Lasso solution.

    ``s = A^T (A x* - b)``; ``E`` holds the indices with ``|s_j| = mu``,
    ``J`` those of ``E`` in the support of ``x*`` and ``K = E \\ J``.
    ``signs`` is the diagonal of ``Q_K``.
    """

    s: np.ndarray
    E: list
    J: list
    K: list
    signs: np.ndarray
    degenerate: list = field(default_factory=list)
    near_threshold: list = field(default_factory=list)

    @property
    def Q_K(self):
        return np.diag(self.signs)


def active_sets(inst, x_star, tol_mag=1e-6, tol_supp=1e-8):
    """Split the indices of a (numerically) optimal Lasso point.

    ``j`` is active when ``|s_j| >= mu (1 - tol_mag)`` and in the support when
    ``|x*_j| > tol_supp * max(1, ||x*||_inf)``.  A zero entry of
    ``A_K^T (A_J x*_J - b)`` is replaced by +1 and listed in ``degenerate``.

    Raises
    ------
    InconsistentOptimality
        If a support index is inactive or has the wrong sign relative to ``s``.
    """
    A, b, mu = inst.A, inst.b, inst.mu
    x = as_vector(x_star, "x_star")
    if x.shape[0] != A.shape[1]:
        raise UsageError("x_star length does not match the number of columns of A")
    s = A.T @ (A @ x - b)
    mag = np.abs(s)
    active = mag >= mu * (1.0 - tol_mag)
    supp_tol = tol_supp * max(1.0, float(np.max(np.abs(x))) if x.size else 1.0)
    support = np.abs(x) > supp_tol

    bad = np.flatnonzero(support & ~active)
    if bad.size:
        raise InconsistentOptimality(
            f"indices {bad.tolist()} are in the support but |s_j| < mu (max gap "
            f"{float(np.max(mu - mag[bad])):.3e})"
        )
    wrong_sign = np.flatnonzero(support & (np.sign(x) == np.sign(s)))
    if wrong_sign.size:
        raise InconsistentOptimality(
            f"indices {wrong_sign.tolist()} have sign(x*_j) == sign(s_j)"
        )

    E = np.flatnonzero(active)
    J = E[support[E]]
    K = E[~support[E]]
    xJ = x[J]
    corr = A[:, K].T @ (A[:, J] @ xJ - b)
    signs = _sign(corr)
    degenerate = K[signs == 0].tolist()
    signs[signs == 0] = 1.0

    near = set(np.flatnonzero(~active & (mag >= mu * (1.0 - 100.0 * tol_mag))).tolist())
    near |= set(np.flatnonzero(support & (np.abs(x) <= 100.0 * supp_tol)).tolist())
    near |= set(np.flatnonzero(~support & (np.abs(x) > 0.0)).tolist())
    return ActiveSets(s, E.tolist(), J.tolist(), K.tolist(), signs, degenerate, sorted(near))


# ---------------------------------------------------------------------------
# uniqueness
# ---------------------------------------------------------------------------

@dataclass
class UniquenessReport:
    condition_ii: bool
    condition_iii: bool
    condition_iv: bool
    a_j_full_rank: bool
    slater_point: np.ndarray | None
    oracle_unique: bool | None
    consistent: bool
    active: ActiveSets | None = field(default=None, repr=False)

    @property
    def unique(self):
        return self.condition_ii


def _cone_kernel_lp(free_block, signed_block):
    """Optimum of ``max 1'x_K  s.t. F x_F + S x_K = 0, x_F free, 0 <= x_K <= 1``."""
    m = free_block.shape[0] if free_block.size else signed_block.shape[0]
    nf = free_block.shape[1] if free_block.ndim == 2 else 0
    nk = signed_block.shape[1]
    lhs = np.hstack([free_block.reshape(m, nf), signed_block])
    lower = np.concatenate([np.full(nf, -math.inf), np.zeros(nk)])
    upper = np.concatenate([np.full(nf, math.inf), np.ones(nk)])
    obj = np.concatenate([np.zeros(nf), np.ones(nk)])
    res = lp_solve(LpProblem(obj, lhs, np.zeros(m), lower, upper))
    if res.status != LpStatus.OPTIMAL:
        raise NumericalFailure(f"cone-kernel LP returned {res.status.value}")
    return res.objective_value


def _slater_lp(N):
    """Maximize ``t <= 1`` subject to ``N y + t 1 <= 0``; return ``(t, y)``."""
    rows, m = N.shape
    # variables: y (free), t (<= 1), w (slacks >= 0);  N y + t 1 + w = 0
    lhs = np.hstack([N, np.ones((rows, 1)), np.eye(rows)])
    lower = np.concatenate([np.full(m, -math.inf), [-math.inf], np.zeros(rows)])
    upper = np.concatenate([np.full(m, math.inf), [1.0], np.full(rows, math.inf)])
    obj = np.zeros(m + 1 + rows)
    obj[m] = 1.0
    res = lp_solve(LpProblem(obj, lhs, np.zeros(rows), lower, upper))
    if res.status != LpStatus.OPTIMAL:
        raise NumericalFailure(f"Slater LP returned {res.status.value}")
    return res.objective_value, res.point[:m]


def check_uniqueness(inst, x_star, tol_mag=1e-6, tol_supp=1e-8, rank_tol=DEFAULT_RANK_TOL,
                     with_oracle=True):
    """Decide whether ``x_star`` is the unique Lasso solution, three ways.

    With ``M = A_J A_J^+ A_K Q_K - A_K Q_K``:

    * (ii)  ``A_J x_J - A_K Q_K x_K = 0, x_K >= 0`` has only the zero solution,
    * (iii) ``A_J`` has full column rank and ``ker M`` meets the nonnegative
      orthant only at 0,
    * (iv)  ``A_J`` has full column rank and some ``y`` has ``M^T y < 0``.

    The three are mathematically equivalent.  When ``with_oracle`` is set the
    brute-force :func:`solution_polytope_oracle` is run too, and
    ``consistent`` records whether all verdicts agree.
    """
    act = active_sets(inst, x_star, tol_mag, tol_supp)
    A = inst.A
    J, K = act.J, act.K
    AJ = A[:, J]
    AKQ = A[:, K] * act.signs
    full_rank = column_rank(AJ, rank_tol) == len(J) if J else True

    if K:
        cond_ii = full_rank and _cone_kernel_lp(AJ, -AKQ) <= _LP_ZERO
    else:
        cond_ii = full_rank

    slater = None
    if not full_rank:
        cond_iii = cond_iv = False
    elif not K:
        cond_iii = cond_iv = True
        slater = np.zeros(A.shape[0])
    else:
        M = AJ @ pseudo_inverse_apply(AJ, AKQ, rank_tol) - AKQ if J else -AKQ
        cond_iii = _cone_kernel_lp(np.zeros((A.shape[0], 0)), M) <= _LP_ZERO
        t, y = _slater_lp(M.T)
        cond_iv = t > _LP_ZERO
        slater = y if cond_iv else None

    oracle = solution_polytope_oracle(inst, x_star, tol_mag, tol_supp, act) if with_oracle else None
    verdicts = {cond_ii, cond_iii, cond_iv}
    if oracle is not None:
        verdicts.add(oracle)
    return UniquenessReport(cond_ii, cond_iii, cond_iv, full_rank, slater, oracle,
                            len(verdicts) == 1, act)


def solution_polytope_oracle(inst, x_star, tol_mag=1e-6, tol_supp=1e-8, act=None):
    """Is the Lasso solution set a single point?  Brute force by LP.

    All solutions share ``Ax`` and hence ``s``, so the solution set is
    ``{x : Ax = Ax*, x_j = 0 off E, s_j x_j <= 0 on E}``.  Each coordinate in
    ``E`` is maximized and minimized over it; the set is a singleton when
    every range is at most ``1e-7``.
    """
    if act is None:
        act = active_sets(inst, x_star, tol_mag, tol_supp)
    if not act.E:
        return True
    A = inst.A
    x = as_vector(x_star)
    clean = np.zeros_like(x)
    clean[act.J] = x[act.J]
    E = act.E
    AE = A[:, E]
    rhs = A @ clean
    sE = act.s[E]
    lower = np.where(sE < 0, 0.0, -math.inf)
    upper = np.where(sE > 0, 0.0, math.inf)
    for i in range(len(E)):
        obj = np.zeros(len(E))
        values = []
        for direction in (1.0, -1.0):
            obj[i] = direction
            res = lp_solve(LpProblem(obj.copy(), AE, rhs, lower, upper))
            if res.status == LpStatus.INFEASIBLE:
                raise NumericalFailure("solution polytope is empty; x_star is not optimal")
            if res.status == LpStatus.UNBOUNDED:
                return False
            values.append(direction * res.objective_value)
        if values[0] - values[1] > _POLYTOPE_GAP:
            return False
    return True


# ---------------------------------------------------------------------------
# l1-regularized smooth problems
# ---------------------------------------------------------------------------

@dataclass
class SubregularityCertificate:
    """Outcome of the ``ker H_E  ∩  U = {0}`` test.

    ``cone_description`` maps each index of ``E`` to ``"free"``, ``"<=0"`` or
    ``">=0"``.  ``modulus_lower_bound`` is a sampled estimate of
    ``min <H_E u, u> / ||u||^2`` over the cone, not a certified bound.
    """

    E: list
    J: list
    K: list
    H_E: np.ndarray
    cone_description: dict
    holds: bool
    modulus_lower_bound: float | None = None


def check_strong_subregularity_l1(hessian, gradient, x_star, mu, tol_mag=1e-6, tol_supp=1e-8,
                                  rank_tol=DEFAULT_RANK_TOL, samples=10_000, seed=0):
    """Strong metric subregularity test for ``f + mu ||.||_1`` at an optimum.

    ``E = {j : |grad_j| = mu}``, ``K = {j in E : x*_j = 0}`` and the cone ``U``
    leaves ``u_J`` free and imposes ``u_j grad_j <= 0`` on ``K``.  A nonzero
    ``u`` in ``ker H_E ∩ U`` either has ``u_K = 0`` (then ``H_E[:, J]`` is rank
    deficient) or can be scaled so ``max |u_K| = 1``; so the test is a rank
    check plus one LP.
    """
    H = as_matrix(hessian, "hessian")
    grad = as_vector(gradient, "gradient")
    x = as_vector(x_star, "x_star")
    n = x.shape[0]
    if H.shape != (n, n) or grad.shape != (n,):
        raise UsageError(f"dimension mismatch: hessian {H.shape}, gradient {grad.shape}, x {n}")
    if not mu > 0:
        raise UsageError("mu must be positive")
    E = np.flatnonzero(np.abs(grad) >= mu * (1.0 - tol_mag))
    supp_tol = tol_supp * max(1.0, float(np.max(np.abs(x))) if n else 1.0)
    in_K = np.abs(x[E]) <= supp_tol
    K = E[in_K]
    J = E[~in_K]
    H_E = H[np.ix_(E, E)]
    cone = {int(j): "free" for j in J}
    for j in K:
        cone[int(j)] = "<=0" if grad[j] > 0 else ">=0"
    cone = dict(sorted(cone.items()))

    if E.size == 0:
        return SubregularityCertificate([], [], [], H_E, {}, True, None)

    posJ = np.flatnonzero(~in_K)
    posK = np.flatnonzero(in_K)
    holds = column_rank(H_E[:, posJ], rank_tol) == posJ.size if posJ.size else True
    if holds and posK.size:
        # substitute u_K = -sign(grad_K) * w, w in [0, 1]
        signed = H_E[:, posK] * -np.sign(grad[K])
        holds = _cone_kernel_lp(H_E[:, posJ], signed) <= _LP_ZERO

    modulus = None
    if holds:
        modulus = _sampled_rayleigh_min(H_E, posJ, posK, -np.sign(grad[K]), samples, seed)
    return SubregularityCertificate(E.tolist(), J.tolist(), K.tolist(), H_E, cone, holds, modulus)


def _sampled_rayleigh_min(H, posJ, posK, dirK, samples, seed):
    rng = np.random.default_rng(seed)
    d = H.shape[0]
    U = np.zeros((samples, d))
    U[:, posJ] = rng.standard_normal((samples, posJ.size))
    U[:, posK] = np.abs(rng.standard_normal((samples, posK.size))) * dirK
    rays = []
    for p in posJ:
        e = np.zeros(d)
        e[p] = 1.0
        rays.extend([e, -e])
    for p, sgn in zip(posK, dirK):
        e = np.zeros(d)
        e[p] = sgn
        rays.append(e)
    if rays:
        U = np.vstack([U, np.array(rays)])
    norms = np.einsum("ij,ij->i", U, U)
    U = U[norms > 0]
    q = np.einsum("ij,jk,ik->i", U, H, U) / np.einsum("ij,ij->i", U, U)
    return float(np.min(q))


def graphical_derivative_membership(x_star, s_bar, mu, u, v, tol=1e-12):
    """Is ``v`` in the graphical derivative of ``d(mu||.||_1)`` at ``(x*, s_bar)`` in direction ``u``?

    With ``I = {j : |s_bar_j| = mu}``, ``J = {j in I : x*_j != 0}`` and
    ``K = I \\ J``, the derivative is nonempty iff ``u_j = 0`` off ``I`` and
    ``u_j s_bar_j >= 0`` on ``K``; it then consists of the ``v`` with
    ``v_J = 0`` and ``u_j v_j = 0``, ``s_bar_j v_j <= 0`` on ``K``.
    """
    x = as_vector(x_star, "x_star")
    s = as_vector(s_bar, "s_bar")
    u = as_vector(u, "u")
    v = as_vector(v, "v")
    n = x.shape[0]
    if not (s.shape == u.shape == v.shape == (n,)):
        raise UsageError("x_star, s_bar, u and v must have the same length")
    if np.any(np.abs(s) > mu + tol):
        raise UsageError("s_bar is not a subgradient: some |s_j| > mu")
    nz = np.abs(x) > tol
    if np.any(np.abs(s[nz] - mu * np.sign(x[nz])) > tol):
        raise UsageError("s_bar is not a subgradient: s_j != mu sign(x_j) on the support")

    on_I = np.abs(np.abs(s) - mu) <= tol
    J = on_I & nz
    K = on_I & ~nz
    if np.any(np.abs(u[~on_I]) > tol):
        return False
    if np.any(u[K] * s[K] < -tol):
        return False
    if np.any(np.abs(v[J]) > tol):
        return False
    if np.any(np.abs(u[K] * v[K]) > tol):
        return False
    if np.any(s[K] * v[K] > tol):
        return False
    return True


# ---------------------------------------------------------------------------
# rates
# ---------------------------------------------------------------------------

class RateMetric(str, enum.Enum):
    ITERATE_DISTANCE = "IterateDistance"
    OBJECTIVE_GAP = "ObjectiveGap"


class RateVariant(str, enum.Enum):
    """Closed-form contraction factors in terms of ``t = alpha * kappa``."""

    DISTANCE_R_LINEAR = "distance-r-linear"      # 1 / sqrt(1 + t)
    DISTANCE_Q_LINEAR = "distance-q-linear"      # 1 / sqrt(1 + t/4)
    OBJECTIVE_Q_LINEAR = "objective-q-linear"    # (sqrt(1 + t/4) + 1) / (2 sqrt(1 + t/4))
    DISTANCE_STRONG = "distance-strong"          # 1 / sqrt(1 + t)
    OBJECTIVE_STRONG = "objective-strong"        # (sqrt(1 + t) + 1) / (2 sqrt(1 + t))


def theoretical_q(alpha, kappa, variant):
    if not (alpha > 0 and kappa > 0):
        raise UsageError("alpha and kappa must be positive")
    variant = RateVariant(variant)
    t = alpha * kappa
    if variant in (RateVariant.DISTANCE_Q_LINEAR, RateVariant.OBJECTIVE_Q_LINEAR):
        t /= 4.0
    root = math.sqrt(1.0 + t)
    if variant in (RateVariant.OBJECTIVE_Q_LINEAR, RateVariant.OBJECTIVE_STRONG):
        return (root + 1.0) / (2.0 * root)
    return 1.0 / root


@dataclass
class RateEstimate:
    window_start: int
    fitted_q: float
    monotone_q: float
    metric: RateMetric
    points: int
    theoretical_q: float | None = None


def rate_from_errors(errors, metric=RateMetric.ITERATE_DISTANCE, min_points=5):
    """Fit a geometric ratio to the last half of an error sequence.

    Entries at or below ``1e-13`` are treated as noise and dropped; only
    ratios of consecutive surviving entries are used.  ``fitted_q`` is their
    geometric mean and ``monotone_q`` their maximum.
    """
    e = np.asarray(errors, dtype=float)
    start = len(e) // 2
    tail = e[start:]
    usable = tail > _NOISE_FLOOR
    if np.count_nonzero(usable) < min_points:
        raise InsufficientData(
            f"only {int(np.count_nonzero(usable))} tail errors above {_NOISE_FLOOR:g}"
        )
    pairs = usable[:-1] & usable[1:]
    if not np.any(pairs):
        raise InsufficientData("no consecutive usable errors in the tail window")
    ratios = tail[1:][pairs] / tail[:-1][pairs]
    fitted = float(np.exp(np.mean(np.log(ratios))))
    return RateEstimate(start, fitted, float(np.max(ratios)), RateMetric(metric),
                        int(np.count_nonzero(usable)))


def estimate_rate(log, reference=None, metric=RateMetric.ITERATE_DISTANCE, iterates=None,
                  alpha=None, kappa=None, variant=None):
    """Estimate the tail contraction factor of a solver run.

    Parameters
    ----------
    log : list of IterateRecord
        At least 10 records.
    reference : array or float, optional
        For ``ITERATE_DISTANCE``, a reference solution (needs ``iterates``);
        if omitted, the records' ``distance_to_reference`` is used.  For
        ``OBJECTIVE_GAP``, the optimal value; defaults to the best objective
        seen in the log.
    iterates : array, optional
        Iterates ``x^0 .. x^K`` from a run with ``keep_iterates=True``.
    alpha, kappa, variant : optional
        When all three are given, the closed-form rate is attached.
    """
    if len(log) < 10:
        raise InsufficientData(f"need at least 10 records, got {len(log)}")
    metric = RateMetric(metric)
    if metric is RateMetric.ITERATE_DISTANCE:
        if reference is not None:
            if iterates is None:
                raise UsageError("a reference point needs the run's iterates")
            diffs = np.asarray(iterates, dtype=float) - as_vector(reference)
            errors = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
        else:
            if any(r.distance_to_reference is None for r in log):
                raise InsufficientData("log has no distances; pass a reference and iterates")
            errors = np.array([r.distance_to_reference for r in log])
    else:
        obj = np.array([r.objective for r in log])
        F_star = float(np.min(obj)) if reference is None else float(reference)
        errors = obj - F_star
    est = rate_from_errors(errors, metric)
    if alpha is not None and kappa is not None and variant is not None:
        est.theoretical_q = theoretical_q(alpha, kappa, variant)
    return est
