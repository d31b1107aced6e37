import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from proxsplit.analysis import (
    RateMetric,
    RateVariant,
    active_sets,
    check_strong_subregularity_l1,
    check_uniqueness,
    estimate_rate,
    graphical_derivative_membership,
    rate_from_errors,
    solution_polytope_oracle,
    theoretical_q,
)
from proxsplit.errors import InconsistentOptimality, InsufficientData, UsageError
from proxsplit.linalg import column_rank
from proxsplit.problems import LassoInstance
from proxsplit.solver import SolverConfig, ista_solve
from proxsplit.suites import random_lasso

IDENTITY = LassoInstance(np.eye(2), [1.0, 0.0], 0.5)
SEGMENT = LassoInstance([[1.0, 1.0]], [2.0], 0.5)


# active sets ------------------------------------------------------------------

def test_active_sets_identity():
    act = active_sets(IDENTITY, [0.5, 0.0])
    np.testing.assert_allclose(act.s, [-0.5, 0.0])
    assert (act.E, act.J, act.K) == ([0], [0], [])


def test_active_sets_segment_vertex():
    act = active_sets(SEGMENT, [1.5, 0.0])
    np.testing.assert_allclose(act.s, [-0.5, -0.5])
    assert (act.E, act.J, act.K) == ([0, 1], [0], [1])
    np.testing.assert_array_equal(act.Q_K, [[-1.0]])


def test_active_sets_empty():
    act = active_sets(LassoInstance([[1.0, 2.0]], [0.0], 1.0), [0.0, 0.0])
    assert act.E == [] and act.J == [] and act.K == []


def test_active_sets_rejects_non_optimal():
    with pytest.raises(InconsistentOptimality):
        active_sets(IDENTITY, [0.7, 0.0])
    with pytest.raises(InconsistentOptimality):
        active_sets(LassoInstance([[1.0]], [1.0], 0.5), [-1.5])


def test_active_sets_zero_point_on_boundary():
    # x* = 0 with |A^T b| = mu in the first coordinate only
    inst = LassoInstance([[1.0, 1.0], [1.0, -1.0]], [1.0, 1.0], 2.0)
    act = active_sets(inst, [0.0, 0.0])
    assert act.E == [0] and act.J == [] and act.K == [0]
    np.testing.assert_array_equal(act.signs, [-1.0])
    assert act.degenerate == []


# uniqueness ---------------------------------------------------------------------

def test_uniqueness_identity():
    rep = check_uniqueness(IDENTITY, [0.5, 0.0])
    assert rep.condition_ii and rep.condition_iii and rep.condition_iv
    assert rep.oracle_unique and rep.consistent and rep.a_j_full_rank


def test_uniqueness_segment():
    rep = check_uniqueness(SEGMENT, [1.5, 0.0])
    assert not (rep.condition_ii or rep.condition_iii or rep.condition_iv or rep.oracle_unique)
    assert rep.consistent
    # the interior of the segment gives the same verdict through the rank test
    rep = check_uniqueness(SEGMENT, [0.75, 0.75])
    assert not rep.unique and not rep.a_j_full_rank and rep.consistent


def test_uniqueness_zero_solution():
    rep = check_uniqueness(LassoInstance([[1.0]], [1.0], 2.0), [0.0])
    assert rep.active.E == []
    assert rep.condition_ii and rep.oracle_unique and rep.consistent


def test_polytope_oracle_examples():
    assert not solution_polytope_oracle(SEGMENT, [1.5, 0.0])
    assert solution_polytope_oracle(IDENTITY, [0.5, 0.0])
    assert solution_polytope_oracle(LassoInstance([[1.0]], [1.0], 2.0), [0.0])


def test_slater_point_certifies_condition_iv():
    A = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [0.0, 0.0, 1.0]])
    inst = LassoInstance(A, [1.0, 1.0, 3.0], 0.5)
    x = ista_solve(inst.A, inst.b, inst.mu, cfg=SolverConfig(tol=1e-13)).final_point
    rep = check_uniqueness(inst, x)
    assert rep.consistent
    if rep.condition_iv and rep.active.K:
        act = rep.active
        AJ = A[:, act.J]
        AKQ = A[:, act.K] * act.signs
        M = AJ @ np.linalg.pinv(AJ) @ AKQ - AKQ
        assert np.all(M.T @ rep.slater_point < 0)


def _solved(seed):
    rng = np.random.default_rng(seed)
    inst = random_lasso(rng)
    x = ista_solve(inst.A, inst.b, inst.mu, cfg=SolverConfig(tol=1e-11, record_certificates=False)).final_point
    return inst, x


@given(st.integers(0, 1_000_000))
def test_full_rank_supports_imply_uniqueness_and_cone_tests_agree(seed):
    inst, x = _solved(seed)
    rep = check_uniqueness(inst, x)
    act = rep.active
    assert rep.condition_iii == rep.condition_iv
    if not act.K and column_rank(inst.A[:, act.J]) == len(act.J):
        assert rep.unique
    if column_rank(inst.A[:, act.E]) == len(act.E):
        assert rep.unique
    assert set(act.J) | set(act.K) == set(act.E) and not set(act.J) & set(act.K)
    assert set(np.abs(act.signs)) <= {1.0}


# subregularity --------------------------------------------------------------------

def test_subregularity_rank_deficient_example():
    H = np.ones((2, 2))
    cert = check_strong_subregularity_l1(H, [1.0, 1.0], [0.0, 0.0], 1.0)
    assert cert.holds
    assert cert.K == [0, 1] and cert.cone_description == {0: "<=0", 1: "<=0"}
    np.testing.assert_array_equal(cert.H_E, H)
    assert column_rank(cert.H_E) == 1
    assert cert.modulus_lower_bound > 0


def test_subregularity_identity_and_zero():
    assert check_strong_subregularity_l1(np.eye(3), [1.0, -1.0, 1.0], [0.0, 0.0, 2.0], 1.0).holds
    assert not check_strong_subregularity_l1(np.zeros((2, 2)), [1.0, -1.0], [0.0, 0.0], 1.0).holds


def test_subregularity_kernel_inside_cone_fails():
    # ker H = span (1, 1) lies in the nonpositive orthant direction (-1, -1)
    H = np.array([[1.0, -1.0], [-1.0, 1.0]])
    assert not check_strong_subregularity_l1(H, [1.0, 1.0], [0.0, 0.0], 1.0).holds


def test_subregularity_dimension_mismatch():
    with pytest.raises(UsageError):
        check_strong_subregularity_l1(np.eye(2), [1.0], [0.0, 0.0], 1.0)


@given(st.integers(0, 1_000_000))
def test_subregularity_matches_lasso_uniqueness(seed):
    inst, x = _solved(seed)
    rep = check_uniqueness(inst, x)
    A = inst.A
    cert = check_strong_subregularity_l1(A.T @ A, rep.active.s, x, inst.mu)
    # for Lasso, strong subregularity at x* is equivalent to uniqueness
    assert cert.holds == rep.unique


# graphical derivative ---------------------------------------------------------------

def test_graphical_derivative_examples():
    assert graphical_derivative_membership([1.0], [2.0], 2.0, [1.0], [0.0])
    assert not graphical_derivative_membership([0.0], [2.0], 2.0, [-1.0], [5.0])
    assert graphical_derivative_membership([1.0, 0.0], [1.0, 1.0], 1.0, [0.0, 0.0], [0.0, -3.0])


def test_graphical_derivative_rejects_non_subgradient():
    with pytest.raises(UsageError):
        graphical_derivative_membership([0.0], [3.0], 2.0, [0.0], [0.0])
    with pytest.raises(UsageError):
        graphical_derivative_membership([1.0], [-1.0], 1.0, [0.0], [0.0])


@given(
    st.lists(st.tuples(st.sampled_from(["J", "K", "off"]), st.floats(-3, 3), st.floats(-3, 3)),
             min_size=1, max_size=5),
    st.floats(1e-3, 1e3),
)
def test_graphical_derivative_positive_homogeneity(entries, t):
    mu = 1.0
    x, s, u, v = [], [], [], []
    for kind, a, c in entries:
        if kind == "J":
            x.append(1.0), s.append(mu), u.append(a), v.append(0.0)
        elif kind == "K":
            x.append(0.0), s.append(-mu)
            u.append(-abs(a)), v.append(0.0 if a != 0 else abs(c))
        else:
            x.append(0.0), s.append(0.5), u.append(0.0), v.append(c)
    args = (np.array(x), np.array(s), mu)
    if graphical_derivative_membership(*args, np.array(u), np.array(v)):
        assert graphical_derivative_membership(*args, t * np.array(u), t * np.array(v))


# rates ---------------------------------------------------------------------------

def test_rate_examples():
    est = rate_from_errors(0.5 ** np.arange(30))
    assert est.fitted_q == pytest.approx(0.5) and est.monotone_q == pytest.approx(0.5)
    assert est.window_start == 15
    assert rate_from_errors(np.ones(20)).fitted_q == 1.0


def test_rate_noise_floor():
    with pytest.raises(InsufficientData):
        rate_from_errors(np.r_[np.ones(10), np.full(10, 1e-14)])


def test_estimate_rate_needs_ten_records():
    res = ista_solve(np.eye(2), [1.0, 0.0], 0.5, cfg=SolverConfig(sigma=1.0, theta=0.5))
    assert res.iterations < 10
    with pytest.raises(InsufficientData):
        estimate_rate(res.log)


def test_estimate_rate_identity_lasso_small_sigma():
    # sigma = 0.1 keeps the step at 0.1, so the error contracts by exactly 0.9
    res = ista_solve(np.eye(2), [1.0, 0.0], 0.5, cfg=SolverConfig(sigma=0.1, keep_iterates=True))
    est = estimate_rate(res.log, [0.5, 0.0], iterates=res.iterates)
    assert est.fitted_q < 1 and est.monotone_q < 1
    assert est.fitted_q == pytest.approx(0.9, rel=1e-6)
    gap = estimate_rate(res.log, 0.375, RateMetric.OBJECTIVE_GAP)
    assert gap.fitted_q == pytest.approx(0.81, rel=1e-3)


def test_theoretical_q():
    assert theoretical_q(1.0, 3.0, RateVariant.DISTANCE_R_LINEAR) == pytest.approx(0.5)
    assert theoretical_q(3.0, 4.0, RateVariant.DISTANCE_Q_LINEAR) == pytest.approx(0.5)
    assert theoretical_q(1.0, 12.0, "objective-q-linear") == pytest.approx(0.75)
    assert theoretical_q(1.0, 3.0, RateVariant.OBJECTIVE_STRONG) == pytest.approx(0.75)
    for variant in RateVariant:
        assert 1 - 1e-6 < theoretical_q(1e-9, 1.0, variant) < 1
        assert 0 < theoretical_q(10.0, 10.0, variant) < 1
    with pytest.raises(UsageError):
        theoretical_q(0.0, 1.0, RateVariant.DISTANCE_STRONG)


def test_estimate_rate_attaches_theory():
    res = ista_solve(np.eye(2), [1.0, 0.0], 0.5, cfg=SolverConfig(sigma=0.1, keep_iterates=True))
    est = estimate_rate(res.log, [0.5, 0.0], iterates=res.iterates, alpha=0.1, kappa=1.0,
                        variant=RateVariant.DISTANCE_STRONG)
    assert est.theoretical_q == pytest.approx(1 / math.sqrt(1.1))
