"""Hot numeric kernels with a compiled loop path and a vectorized numpy path.

Both paths compute the same quantities; which one is bound to the public
names below is decided once, at import, by :mod:`proxsplit._backend`.
The loop versions are written for ``numba.njit`` and only make sense
compiled; the numpy versions are what runs under ``PROXSPLIT_BACKEND=numpy``.
"""

from __future__ import annotations

import math

import numpy as np

from ._backend import BACKEND, njit

__all__ = [
    "BACKEND",
    "soft_threshold",
    "project_nonneg",
    "lasso_value",
    "lasso_grad",
    "poisson_value",
    "poisson_grad",
    "pivot",
    "power_iteration",
    "LOOP_KERNELS",
    "NUMPY_KERNELS",
]


# ---------------------------------------------------------------------------
# loop kernels (numba)
# ---------------------------------------------------------------------------

@njit
def _loop_soft_threshold(z, lam):
    out = np.empty_like(z)
    for j in range(z.shape[0]):
        zj = z[j]
        if zj > lam:
            out[j] = zj - lam
        elif zj < -lam:
            out[j] = zj + lam
        else:
            out[j] = 0.0
    return out


@njit
def _loop_project_nonneg(z):
    out = np.empty_like(z)
    for j in range(z.shape[0]):
        out[j] = z[j] if z[j] > 0.0 else 0.0
    return out


@njit
def _loop_residual(A, b, x):
    m, n = A.shape
    r = np.empty(m)
    for i in range(m):
        acc = 0.0
        for j in range(n):
            acc += A[i, j] * x[j]
        r[i] = acc - b[i]
    return r


@njit
def _loop_lasso_value(A, b, x):
    r = _loop_residual(A, b, x)
    acc = 0.0
    for i in range(r.shape[0]):
        acc += r[i] * r[i]
    return 0.5 * acc


@njit
def _loop_lasso_grad(A, b, x):
    m, n = A.shape
    r = _loop_residual(A, b, x)
    g = np.zeros(n)
    for i in range(m):
        ri = r[i]
        for j in range(n):
            g[j] += A[i, j] * ri
    return g


@njit
def _loop_poisson_value(A, b, x):
    m, n = A.shape
    total = 0.0
    for i in range(m):
        y = 0.0
        for j in range(n):
            y += A[i, j] * x[j]
        if not y > 0.0:
            return math.inf
        total += b[i] * math.log(b[i] / y) + y - b[i]
    return total


@njit
def _loop_poisson_grad(A, b, x):
    m, n = A.shape
    g = np.zeros(n)
    for i in range(m):
        y = 0.0
        for j in range(n):
            y += A[i, j] * x[j]
        w = 1.0 - b[i] / y
        for j in range(n):
            g[j] += w * A[i, j]
    return g


@njit
def _loop_pivot(T, row, col):
    rows, cols = T.shape
    p = T[row, col]
    for j in range(cols):
        T[row, j] /= p
    for i in range(rows):
        if i == row:
            continue
        factor = T[i, col]
        if factor != 0.0:
            for j in range(cols):
                T[i, j] -= factor * T[row, j]
            T[i, col] = 0.0
    T[row, col] = 1.0


@njit
def _loop_power_iteration(A, v0, max_iter, rtol):
    m, n = A.shape
    v = v0.copy()
    lam = 0.0
    for _ in range(max_iter):
        w = np.zeros(n)
        for i in range(m):
            acc = 0.0
            for j in range(n):
                acc += A[i, j] * v[j]
            for j in range(n):
                w[j] += A[i, j] * acc
        norm = 0.0
        for j in range(n):
            norm += w[j] * w[j]
        norm = math.sqrt(norm)
        if norm == 0.0:
            return 0.0
        for j in range(n):
            v[j] = w[j] / norm
        if abs(norm - lam) <= rtol * norm:
            return norm
        lam = norm
    return lam


# ---------------------------------------------------------------------------
# numpy kernels
# ---------------------------------------------------------------------------

def _np_soft_threshold(z, lam):
    return np.sign(z) * np.maximum(np.abs(z) - lam, 0.0)


def _np_project_nonneg(z):
    return np.maximum(z, 0.0)


def _np_lasso_value(A, b, x):
    r = A @ x - b
    return 0.5 * float(r @ r)


def _np_lasso_grad(A, b, x):
    return A.T @ (A @ x - b)


def _np_poisson_value(A, b, x):
    y = A @ x
    if not np.all(y > 0.0):
        return math.inf
    return float(np.sum(b * np.log(b / y) + y - b))


def _np_poisson_grad(A, b, x):
    return A.T @ (1.0 - b / (A @ x))


def _np_pivot(T, row, col):
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])
    T[:, col] = 0.0
    T[row, col] = 1.0


def _np_power_iteration(A, v0, max_iter, rtol):
    v = v0.copy()
    lam = 0.0
    for _ in range(max_iter):
        w = A.T @ (A @ v)
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(norm - lam) <= rtol * norm:
            return norm
        lam = norm
    return lam


NUMPY_KERNELS = {
    "soft_threshold": _np_soft_threshold,
    "project_nonneg": _np_project_nonneg,
    "lasso_value": _np_lasso_value,
    "lasso_grad": _np_lasso_grad,
    "poisson_value": _np_poisson_value,
    "poisson_grad": _np_poisson_grad,
    "pivot": _np_pivot,
    "power_iteration": _np_power_iteration,
}

# Only populated when the numba backend is active; uncompiled loops would be
# far slower than the numpy path.
LOOP_KERNELS = {}
if BACKEND == "numba":
    LOOP_KERNELS = {
        "soft_threshold": _loop_soft_threshold,
        "project_nonneg": _loop_project_nonneg,
        "lasso_value": _loop_lasso_value,
        "lasso_grad": _loop_lasso_grad,
        "poisson_value": _loop_poisson_value,
        "poisson_grad": _loop_poisson_grad,
        "pivot": _loop_pivot,
        "power_iteration": _loop_power_iteration,
    }

_active = LOOP_KERNELS if LOOP_KERNELS else NUMPY_KERNELS

soft_threshold = _active["soft_threshold"]
project_nonneg = _active["project_nonneg"]
lasso_value = _active["lasso_value"]
lasso_grad = _active["lasso_grad"]
poisson_value = _active["poisson_value"]
poisson_grad = _active["poisson_grad"]
pivot = _active["pivot"]
power_iteration = _active["power_iteration"]
