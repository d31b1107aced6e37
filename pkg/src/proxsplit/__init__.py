"""Forward-backward splitting for ``min f(x) + g(x)`` with backtracking step sizes.

Solvers for Lasso and Poisson (Kullback-Leibler) problems, Lasso uniqueness
certificates, a strong subregularity test for l1-regularized objectives
and tail-rate estimation from iterate logs.
"""

from .analysis import (
    ActiveSets,
    RateEstimate,
    RateMetric,
    RateVariant,
    SubregularityCertificate,
    UniquenessReport,
    active_sets,
    check_strong_subregularity_l1,
    check_uniqueness,
    estimate_rate,
    graphical_derivative_membership,
    rate_from_errors,
    solution_polytope_oracle,
    theoretical_q,
)
from .errors import (
    InconsistentOptimality,
    InsufficientData,
    LineSearchStalled,
    NumericalFailure,
    OracleError,
    ProxSplitError,
    RankDeficient,
    UsageError,
)
from .kernels import BACKEND
from .linalg import LpProblem, LpStatus, column_rank, lp_solve, pseudo_inverse_apply
from .linesearch import LineSearchConfig, forward_backward_point, search
from .oracles import (
    CompositeProblem,
    ProxOracle,
    SmoothOracle,
    l1_norm,
    nonneg_indicator,
    project_nonneg,
    prox_of,
    quadratic,
    soft_threshold,
    zero_function,
)
from .problems import (
    LassoInstance,
    PoissonInstance,
    build_l1_smooth,
    build_lasso,
    build_poisson,
    lambda_max,
)
from .solver import IterateRecord, SolveResult, SolverConfig, Status, ista_solve, poisson_solve, solve

__version__ = "0.1.0"
