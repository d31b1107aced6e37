"""Dense linear algebra helpers and a small two-phase simplex LP engine.

Everything here works on plain float64 numpy arrays.  Matrices are desk-sized
(tens of rows and columns at most), so nothing is sparse or iterative.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import NumericalFailure, RankDeficient, UsageError

__all__ = [
    "as_vector",
    "as_matrix",
    "matvec",
    "column_rank",
    "pseudo_inverse_apply",
    "LpStatus",
    "LpProblem",
    "LpFeasibilityResult",
    "lp_solve",
]

DEFAULT_RANK_TOL = 1e-10


def as_vector(x, name="vector"):
    """Return ``x`` as a finite 1-D float64 array."""
    v = np.array(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise UsageError(f"{name} has non-finite entries")
    return v


def as_matrix(A, name="matrix"):
    """Return ``A`` as a finite 2-D float64 C-contiguous array."""
    M = np.array(A, dtype=float)
    if M.ndim == 1:
        M = M.reshape(1, -1)
    if M.ndim != 2:
        raise UsageError(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise UsageError(f"{name} has non-finite entries")
    return np.ascontiguousarray(M)


def matvec(A, x):
    """Compute ``A @ x`` after checking that the shapes agree."""
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    if A.ndim != 2 or x.ndim != 1 or A.shape[1] != x.shape[0]:
        raise UsageError(
            f"cannot multiply matrix of shape {A.shape} with vector of shape {x.shape}"
        )
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(x))):
        raise UsageError("matvec operands have non-finite entries")
    return A @ x


def column_rank(A, tol=DEFAULT_RANK_TOL):
    """Numerical rank of ``A`` from its singular values.

    A singular value counts when it exceeds ``tol`` times the largest one.
    A matrix with no columns has rank 0.
    """
    if tol <= 0:
        raise UsageError("rank tolerance must be positive")
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise UsageError(f"expected a 2-D matrix, got shape {A.shape}")
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def pseudo_inverse_apply(A, v, tol=DEFAULT_RANK_TOL):
    """Apply ``(A^T A)^{-1} A^T`` to ``v`` (a vector or a matrix of columns).

    Raises
    ------
    RankDeficient
        If ``A`` does not have full column rank at tolerance ``tol``.
    """
    A = np.asarray(A, dtype=float)
    v = np.asarray(v, dtype=float)
    if A.ndim != 2 or v.shape[0] != A.shape[0]:
        raise UsageError(f"shape mismatch: A {A.shape}, v {v.shape}")
    n = A.shape[1]
    if n == 0:
        return np.zeros((0,) + v.shape[1:])
    rank = column_rank(A, tol)
    if rank < n:
        raise RankDeficient(f"matrix has rank {rank} < {n} columns")
    z, *_ = np.linalg.lstsq(A, v, rcond=None)
    return z


# ---------------------------------------------------------------------------
# linear programming
# ---------------------------------------------------------------------------

class LpStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass
class LpProblem:
    """``maximize c @ x`` subject to ``eq_lhs @ x == eq_rhs`` and ``lower <= x <= upper``.

    Bounds default to ``x >= 0``.  Use ``-inf``/``inf`` for missing bounds.
    ``eq_lhs`` may have zero rows.
    """

    objective: np.ndarray
    eq_lhs: np.ndarray | None = None
    eq_rhs: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        self.objective = as_vector(self.objective, "objective")
        n = self.objective.shape[0]
        if self.eq_lhs is None:
            self.eq_lhs = np.zeros((0, n))
            self.eq_rhs = np.zeros(0)
        else:
            self.eq_lhs = np.array(self.eq_lhs, dtype=float).reshape(-1, n)
            self.eq_rhs = as_vector(self.eq_rhs, "eq_rhs")
            if not np.all(np.isfinite(self.eq_lhs)):
                raise UsageError("eq_lhs has non-finite entries")
        if self.eq_rhs.shape[0] != self.eq_lhs.shape[0]:
            raise UsageError("eq_lhs and eq_rhs have inconsistent row counts")
        self.lower = (np.zeros(n) if self.lower is None
                      else np.array(self.lower, dtype=float).reshape(-1))
        self.upper = (np.full(n, math.inf) if self.upper is None
                      else np.array(self.upper, dtype=float).reshape(-1))
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise UsageError("bounds must have one entry per variable")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise UsageError("bounds must not be NaN")
        if np.any(self.lower > self.upper):
            raise UsageError("lower bound exceeds upper bound")
        if np.any(self.lower == math.inf) or np.any(self.upper == -math.inf):
            raise UsageError("bounds exclude every real value")

    @property
    def n(self):
        return self.objective.shape[0]


@dataclass
class LpFeasibilityResult:
    status: LpStatus
    point: np.ndarray | None = None
    objective_value: float | None = None
    pivots: int = field(default=0, repr=False)


_PIVOT_TOL = 1e-9
_COST_TOL = 1e-9
_FEAS_TOL = 1e-9


def _standard_form(p):
    """Rewrite bounds so every variable is nonnegative.

    Returns ``(M, r, c, D, offset)`` with ``x = offset + D @ z`` and the
    standard-form problem ``max c @ z  s.t.  M z = r, z >= 0``.
    """
    n = p.n
    columns = []       # (original index, sign)
    offset = np.zeros(n)
    box_rows = []      # (z column, width)
    for j in range(n):
        lo, hi = p.lower[j], p.upper[j]
        if math.isfinite(lo):
            offset[j] = lo
            columns.append((j, 1.0))
            if math.isfinite(hi):
                box_rows.append((len(columns) - 1, hi - lo))
        elif math.isfinite(hi):
            offset[j] = hi
            columns.append((j, -1.0))
        else:
            columns.append((j, 1.0))
            columns.append((j, -1.0))
    nz = len(columns)
    D = np.zeros((n, nz))
    for col, (j, sign) in enumerate(columns):
        D[j, col] = sign
    n_slack = len(box_rows)
    n_rows = p.eq_lhs.shape[0] + n_slack
    M = np.zeros((n_rows, nz + n_slack))
    r = np.zeros(n_rows)
    k = p.eq_lhs.shape[0]
    M[:k, :nz] = p.eq_lhs @ D
    r[:k] = p.eq_rhs - p.eq_lhs @ offset
    for i, (col, width) in enumerate(box_rows):
        M[k + i, col] = 1.0
        M[k + i, nz + i] = 1.0
        r[k + i] = width
    c = np.zeros(nz + n_slack)
    c[:nz] = D.T @ p.objective
    D_full = np.zeros((n, nz + n_slack))
    D_full[:, :nz] = D
    return M, r, c, D_full, offset


class _Tableau:
    """Dense simplex tableau using Bland's rule.

    Row ``i < rows`` stores ``B^{-1} [M | I]`` and the basic values in the last
    column; the final row stores ``c_B B^{-1} A_j - c_j`` and the objective.
    """

    def __init__(self, T, basis, max_pivots):
        self.T = T
        self.basis = basis
        self.pivots = 0
        self.max_pivots = max_pivots

    def pivot(self, row, col):
        if self.pivots >= self.max_pivots:
            raise NumericalFailure(
                f"simplex exceeded {self.max_pivots} pivots (cycling guard)"
            )
        kernels.pivot(self.T, row, col)
        self.basis[row] = col
        self.pivots += 1

    def set_objective(self, cost):
        T = self.T
        rows = T.shape[0] - 1
        cb = cost[self.basis]
        T[-1, :-1] = cb @ T[:rows, :-1] - cost
        T[-1, -1] = cb @ T[:rows, -1]

    def run(self, n_cols):
        """Iterate until optimal; return False when unbounded."""
        T = self.T
        rows = T.shape[0] - 1
        while True:
            reduced = T[-1, :n_cols]
            candidates = np.flatnonzero(reduced < -_COST_TOL)
            if candidates.size == 0:
                return True
            col = int(candidates[0])
            column = T[:rows, col]
            best_row = -1
            best_ratio = math.inf
            for i in range(rows):
                a = column[i]
                if a > _PIVOT_TOL:
                    ratio = max(T[i, -1], 0.0) / a
                    if ratio < best_ratio - 1e-12 or (
                        abs(ratio - best_ratio) <= 1e-12 and self.basis[i] < self.basis[best_row]
                    ):
                        best_ratio = ratio
                        best_row = i
            if best_row < 0:
                return False
            self.pivot(best_row, col)


def lp_solve(p, max_pivots=None):
    """Solve a small dense LP with the two-phase simplex method.

    Bland's smallest-index rule is used for both the entering and the leaving
    variable, so cycling cannot occur in exact arithmetic; ``max_pivots`` is
    a guard against floating-point trouble.

    Returns
    -------
    LpFeasibilityResult
        ``point`` and ``objective_value`` are set only when the status is
        ``OPTIMAL``.
    """
    M, r, c, D, offset = _standard_form(p)
    rows, nz = M.shape
    neg = r < 0
    M[neg] *= -1.0
    r[neg] *= -1.0
    if max_pivots is None:
        max_pivots = 50 * (rows + nz + 10)

    # phase 1: artificial basis, minimize the sum of artificials
    T = np.zeros((rows + 1, nz + rows + 1))
    T[:rows, :nz] = M
    T[:rows, nz:nz + rows] = np.eye(rows)
    T[:rows, -1] = r
    tab = _Tableau(T, np.arange(nz, nz + rows), max_pivots)
    phase1_cost = np.concatenate([np.zeros(nz), -np.ones(rows)])
    tab.set_objective(phase1_cost)
    tab.run(nz + rows)
    scale = 1.0 + (float(np.max(np.abs(r))) if rows else 0.0)
    if -tab.T[-1, -1] > _FEAS_TOL * scale:
        return LpFeasibilityResult(LpStatus.INFEASIBLE, pivots=tab.pivots)

    # drive zero-level artificials out of the basis, dropping redundant rows
    keep = []
    for i in range(rows):
        if tab.basis[i] >= nz:
            row = tab.T[i, :nz]
            cand = np.flatnonzero(np.abs(row) > _PIVOT_TOL)
            if cand.size == 0:
                continue
            tab.pivot(i, int(cand[0]))
        keep.append(i)
    T2 = np.zeros((len(keep) + 1, nz + 1))
    T2[:-1, :nz] = tab.T[keep, :nz]
    T2[:-1, -1] = tab.T[keep, -1]
    tab2 = _Tableau(T2, tab.basis[keep].copy(), max_pivots)
    tab2.pivots = tab.pivots
    tab2.set_objective(c)
    if not tab2.run(nz):
        return LpFeasibilityResult(LpStatus.UNBOUNDED, pivots=tab2.pivots)

    z = np.zeros(nz)
    z[tab2.basis] = np.maximum(tab2.T[:-1, -1], 0.0)
    x = offset + D @ z
    x = np.clip(x, p.lower, p.upper)
    _check_point(p, x)
    return LpFeasibilityResult(LpStatus.OPTIMAL, x, float(p.objective @ x), tab2.pivots)


def _check_point(p, x):
    if p.eq_lhs.shape[0] == 0:
        return
    resid = np.abs(p.eq_lhs @ x - p.eq_rhs)
    scale = 1.0 + np.abs(p.eq_lhs) @ np.abs(x) + np.abs(p.eq_rhs)
    bad = resid > _FEAS_TOL * scale
    if np.any(bad):
        raise NumericalFailure(
            f"simplex returned a point violating equality rows {np.flatnonzero(bad).tolist()}"
        )
