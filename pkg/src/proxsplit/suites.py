"""Seeded instance generators and the reproduction suites behind ``proxsplit bench``.

Every suite returns a list of :class:`SuiteRow`; a suite passes when all of
its rows pass.  The thresholds are the acceptance thresholds of the test
suite and are not tunable from the command line.  Rows hold no timings,
so a suite run is a deterministic function of its seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import check_uniqueness, estimate_rate
from .problems import LassoInstance, PoissonInstance
from .solver import SolverConfig, Status, ista_solve, poisson_solve

__all__ = [
    "SuiteRow",
    "random_lasso",
    "random_unique_lasso",
    "random_poisson",
    "hand_lasso_instances",
    "polish_lasso_solution",
    "sublinear_tail_ratio",
    "suite_lasso_rate",
    "suite_poisson",
    "suite_uniqueness",
    "SUITES",
    "run_suites",
]


@dataclass
class SuiteRow:
    suite: str
    criterion: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""


def random_lasso(rng):
    """Small integer Lasso instance: entries of A and b uniform on {-2, ..., 2}."""
    m = int(rng.integers(1, 6))
    n = int(rng.integers(2, 9))
    A = rng.integers(-2, 3, size=(m, n)).astype(float)
    b = rng.integers(-2, 3, size=m).astype(float)
    mu = float(rng.choice([0.3, 0.5, 1.0]))
    return LassoInstance(A, b, mu)


def hand_lasso_instances():
    return [
        LassoInstance([[1.0, 0.0], [0.0, 1.0]], [1.0, 0.0], 0.5),
        LassoInstance([[1.0, 1.0]], [2.0], 0.5),
        LassoInstance([[1.0]], [1.0], 2.0),
    ]


def polish_lasso_solution(inst, x, tol_supp=1e-8):
    """Re-solve the optimality equations on the support of ``x``.

    On the support ``J`` an optimal point satisfies
    ``A_J^T (A_J x_J - b) = -mu sign(x_J)``; when ``A_J`` has full column rank
    this pins ``x_J`` down to machine precision.  Returns ``x`` unchanged if
    the support is rank deficient or the polished point changes sign.
    """
    x = np.asarray(x, dtype=float)
    scale = tol_supp * max(1.0, float(np.max(np.abs(x))))
    J = np.flatnonzero(np.abs(x) > scale)
    if J.size == 0:
        return np.zeros_like(x)
    AJ = inst.A[:, J]
    G = AJ.T @ AJ
    if np.linalg.matrix_rank(G) < J.size:
        return x
    xJ = np.linalg.solve(G, AJ.T @ inst.b - inst.mu * np.sign(x[J]))
    if np.any(np.sign(xJ) != np.sign(x[J])):
        return x
    out = np.zeros_like(x)
    out[J] = xJ
    return out


def random_unique_lasso(rng, m=6, n=4, max_tries=100):
    """Gaussian Lasso instance whose solution is certified unique."""
    for _ in range(max_tries):
        A = rng.standard_normal((m, n))
        b = rng.standard_normal(m)
        mu = float(rng.uniform(0.05, 0.5)) * float(np.max(np.abs(A.T @ b)))
        inst = LassoInstance(A, b, mu)
        res = ista_solve(A, b, mu, cfg=SolverConfig(tol=1e-12, record_certificates=False))
        x = polish_lasso_solution(inst, res.final_point)
        if check_uniqueness(inst, x, with_oracle=False).condition_ii and np.any(x != 0):
            return inst, x
    raise RuntimeError("could not draw a Lasso instance with a unique nonzero solution")


def random_poisson(rng, m=3, n=4):
    """Poisson instance with entries of A uniform on [0.1, 1] and b on [0.5, 2]."""
    A = rng.uniform(0.1, 1.0, size=(m, n))
    b = rng.uniform(0.5, 2.0, size=m)
    return PoissonInstance(A, b)


def sublinear_tail_ratio(objectives, F_star, tail_fraction=0.1):
    """``max k (F_k - F*)`` over the last ``tail_fraction`` of a run, divided by its run maximum."""
    F = np.asarray(objectives, dtype=float)
    k = np.arange(F.shape[0])
    prof = k * (F - F_star)
    peak = float(np.max(prof))
    start = int(math.floor(F.shape[0] * (1.0 - tail_fraction)))
    if peak <= 0.0:
        return 0.0
    return float(np.max(prof[start:])) / peak


def suite_lasso_rate(seed=42, instances=20):
    """Q-linear tail of ISTA on random Lasso instances with unique solutions."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(instances):
        inst, x_ref = random_unique_lasso(rng)
        res = ista_solve(inst.A, inst.b, inst.mu, cfg=SolverConfig(tol=1e-10, keep_iterates=True))
        est = estimate_rate(res.log, x_ref, iterates=res.iterates)
        detail = f"instance {i}: {res.iterations} iterations, fitted_q={est.fitted_q:.6f}"
        rows.append(SuiteRow("lasso", "monotone_q < 1", est.monotone_q, 1.0,
                             est.monotone_q < 1.0, detail))
        rows.append(SuiteRow("lasso", "fitted_q < 0.999", est.fitted_q, 0.999,
                             est.fitted_q < 0.999, detail))
        rows.append(SuiteRow("lasso", "converged", res.final_residual, 1e-10,
                             res.status is Status.CONVERGED, detail))
    return rows


def suite_poisson(seed=42, instances=5):
    """Sublinear profile on a 3x4 instance and Q-linear tails on random ones."""
    rng = np.random.default_rng(seed)
    rows = []
    inst = random_poisson(rng, 3, 4)
    ref = poisson_solve(inst.A, inst.b, cfg=SolverConfig(tol=1e-13, record_certificates=False))
    run = poisson_solve(inst.A, inst.b, cfg=SolverConfig(tol=1e-10, record_certificates=False))
    objectives = [r.objective for r in run.log] + [run.final_objective]
    ratio = sublinear_tail_ratio(objectives, ref.final_objective)
    rows.append(SuiteRow("poisson", "k(F_k - F*) tail / max < 0.1", ratio, 0.1, ratio < 0.1,
                         f"3x4 instance, {run.iterations} iterations"))
    for i in range(instances):
        m, n = (3, 4) if i % 2 == 0 else (6, 3)
        inst = random_poisson(rng, m, n)
        ref = poisson_solve(inst.A, inst.b, cfg=SolverConfig(tol=1e-12, record_certificates=False))
        res = poisson_solve(inst.A, inst.b, cfg=SolverConfig(tol=1e-10, keep_iterates=True))
        est = estimate_rate(res.log, ref.final_point, iterates=res.iterates)
        detail = f"{m}x{n} instance {i}: {res.iterations} iterations, fitted_q={est.fitted_q:.6f}"
        rows.append(SuiteRow("poisson", "monotone_q < 1", est.monotone_q, 1.0,
                             est.monotone_q < 1.0, detail))
    return rows


def suite_uniqueness(seed=42, instances=100):
    """Agreement of the three uniqueness conditions with the polytope oracle."""
    rng = np.random.default_rng(seed)
    cases = hand_lasso_instances() + [random_lasso(rng) for _ in range(instances)]
    cfg = SolverConfig(tol=1e-10, record_certificates=False)
    agree = 0
    unique = 0
    failures = []
    for i, inst in enumerate(cases):
        res = ista_solve(inst.A, inst.b, inst.mu, cfg=cfg)
        rep = check_uniqueness(inst, res.final_point)
        agree += rep.consistent
        unique += rep.condition_ii
        if not rep.consistent:
            failures.append(i)
    detail = f"{len(cases)} instances, {unique} unique, disagreements at {failures}"
    return [
        SuiteRow("uniqueness", "agreement rate == 1", agree / len(cases), 1.0,
                 agree == len(cases), detail),
    ]


SUITES = {
    "lasso": suite_lasso_rate,
    "poisson": suite_poisson,
    "uniqueness": suite_uniqueness,
}


def run_suites(names=None, seed=42, instances=None):
    """Run the named suites (all by default) and collect their rows."""
    names = list(SUITES) if not names else list(names)
    rows = []
    for name in names:
        fn = SUITES[name]
        if instances is not None and name in ("lasso", "uniqueness"):
            rows.extend(fn(seed, instances))
        else:
            rows.extend(fn(seed))
    return rows
