"""``proxsplit`` command line: ``solve``, ``analyze`` and ``bench``.

Data files are header-less CSV (matrices as rows, vectors as one column);
every number written is formatted with 17 significant digits so files
round-trip bit-exactly.  Exit codes::

    0  success (solve: Converged)        4  analyze: uniqueness checks disagree
    1  usage, parse or file error        5  analyze: point is not optimal
    2  solve: MaxIterations               6  bench: a suite criterion failed
    3  solve: Diverging

Problem kinds: ``lasso`` reads ``A`` and ``b`` for ``0.5||Ax - b||^2 + mu||x||_1``;
``l1smooth`` reads ``H`` and ``c`` for ``0.5 x'Hx + c'x + mu||x||_1``;
``poisson`` reads ``A`` and ``b`` for the KL objective over ``x >= 0`` (``--mu``
adds ``mu * sum(x)``).
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys

import numpy as np

from .analysis import (
    check_strong_subregularity_l1,
    check_uniqueness,
    estimate_rate,
)
from .errors import InconsistentOptimality, InsufficientData, NumericalFailure, ProxSplitError, UsageError
from .linesearch import forward_backward_point
from .oracles import quadratic
from .problems import LassoInstance, PoissonInstance, build_l1_smooth, build_lasso, build_poisson
from .solver import SolverConfig, Status, solve
from .suites import SUITES, run_suites

__all__ = ["main", "read_matrix", "read_vector", "write_matrix", "write_vector", "format_number"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MAX_ITER = 2
EXIT_DIVERGING = 3
EXIT_INCONSISTENT = 4
EXIT_NOT_OPTIMAL = 5
EXIT_SUITE_FAILED = 6

_STATUS_EXIT = {
    Status.CONVERGED: EXIT_OK,
    Status.MAX_ITERATIONS: EXIT_MAX_ITER,
    Status.DIVERGING: EXIT_DIVERGING,
}

# prox-gradient residual ||x - prox_g(x - grad f(x))|| accepted as optimal
_OPTIMALITY_TOL = 1e-6


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

def format_number(v):
    v = float(v)
    return "" if math.isnan(v) else f"{v:.17g}"


def _load(path, what):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {what} file {path!r}: {exc.strerror}") from None
    if path.endswith(".json"):
        try:
            data = np.asarray(json.loads(text), dtype=float)
        except (json.JSONDecodeError, TypeError, ValueError) as exc:
            raise UsageError(f"{what} file {path!r} is not a JSON array of numbers: {exc}") from None
        return np.atleast_2d(data) if data.ndim < 2 else data
    try:
        data = np.loadtxt(io.StringIO(text), delimiter=",", ndmin=2)
    except ValueError as exc:
        raise UsageError(f"{what} file {path!r} does not parse as CSV: {exc}") from None
    if data.size == 0:
        raise UsageError(f"{what} file {path!r} is empty")
    if not np.all(np.isfinite(data)):
        raise UsageError(f"{what} file {path!r} contains non-finite values")
    return data


def read_matrix(path, what="matrix"):
    return _load(path, what)


def read_vector(path, what="vector"):
    data = _load(path, what)
    if min(data.shape) != 1:
        raise UsageError(f"{what} file {path!r} has shape {data.shape}; expected a single column")
    return data.ravel()


def write_matrix(A, fh):
    for row in np.atleast_2d(A):
        fh.write(",".join(format_number(v) for v in row) + "\n")


def write_vector(x, fh):
    for v in np.ravel(x):
        fh.write(format_number(v) + "\n")


def write_log(log, fh):
    fh.write("k,alpha,objective,residual,descent_slack,fejer_slack,dist_to_ref\n")
    for r in log:
        fields = [
            str(r.k),
            format_number(r.alpha_k),
            format_number(r.objective),
            format_number(r.residual),
            format_number(r.descent_certificate),
            "" if r.fejer_certificate is None else format_number(r.fejer_certificate),
            "" if r.distance_to_reference is None else format_number(r.distance_to_reference),
        ]
        fh.write(",".join(fields) + "\n")


def _open_out(path):
    if path is None or path == "-":
        return _Borrowed(sys.stdout)
    try:
        return open(path, "w", newline="")
    except OSError as exc:
        raise UsageError(f"cannot write {path!r}: {exc.strerror}") from None


class _Borrowed:
    def __init__(self, fh):
        self.fh = fh

    def __enter__(self):
        return self.fh

    def __exit__(self, *exc):
        self.fh.flush()


# ---------------------------------------------------------------------------
# problem assembly
# ---------------------------------------------------------------------------

class _Instance:
    """A parsed problem: the composite model plus what the analysis needs."""

    def __init__(self, kind, problem, default_start, lasso=None, hessian=None, linear=None, mu=None):
        self.kind = kind
        self.problem = problem
        self.default_start = default_start
        self.lasso = lasso
        self.hessian = hessian
        self.linear = linear
        self.mu = mu


def _load_instance(args):
    if args.matrix is None or args.rhs is None:
        raise UsageError("--matrix and --rhs are required")
    M = read_matrix(args.matrix, "matrix")
    v = read_vector(args.rhs, "rhs")
    if args.problem in ("lasso", "l1smooth") and args.mu is None:
        raise UsageError(f"--mu is required for --problem {args.problem}")
    if args.problem == "lasso":
        inst = LassoInstance(M, v, args.mu)
        return _Instance("lasso", build_lasso(inst), np.zeros(M.shape[1]), lasso=inst,
                         hessian=inst.A.T @ inst.A, mu=inst.mu)
    if args.problem == "l1smooth":
        if M.shape[0] != M.shape[1] or not np.allclose(M, M.T, rtol=0.0, atol=1e-12):
            raise UsageError("l1smooth needs a symmetric square matrix H")
        if v.shape[0] != M.shape[0]:
            raise UsageError("l1smooth: c must have one entry per row of H")
        if not args.mu > 0:
            raise UsageError("mu must be positive")
        p = build_l1_smooth(quadratic(M, v), args.mu, M.shape[0])
        return _Instance("l1smooth", p, np.zeros(M.shape[0]), hessian=M, linear=v, mu=float(args.mu))
    inst = PoissonInstance(M, v, 0.0 if args.mu is None else args.mu)
    return _Instance("poisson", build_poisson(inst), np.ones(M.shape[1]))


def _config(args, **extra):
    return SolverConfig(sigma=args.sigma, theta=args.theta, tol=args.tol, max_iter=args.max_iter, **extra)


def _start_point(inst, path):
    if path is None:
        return inst.default_start
    x0 = read_vector(path, "start point")
    if x0.shape[0] != inst.problem.dimension:
        raise UsageError(f"start point has length {x0.shape[0]}, expected {inst.problem.dimension}")
    return x0


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_solve(args):
    inst = _load_instance(args)
    x0 = _start_point(inst, args.point)
    if inst.kind == "poisson" and not math.isfinite(inst.problem.objective(x0)):
        raise UsageError("poisson start point needs x0 >= 0 and A @ x0 > 0")
    res = solve(inst.problem, x0, _config(args))
    with _open_out(args.out) as fh:
        write_vector(res.final_point, fh)
    if args.log is not None:
        with _open_out(args.log) as fh:
            write_log(res.log, fh)
    print(f"{res.status.value}: {res.iterations} iterations, F = {format_number(res.final_objective)}",
          file=sys.stderr)
    return _STATUS_EXIT[res.status]


def _optimality_residual(problem, x):
    J = forward_backward_point(problem, x, 1.0)
    return float(np.linalg.norm(x - J))


def _list(v):
    return None if v is None else [float(t) for t in np.ravel(v)]


def cmd_analyze(args):
    inst = _load_instance(args)
    if args.point is None:
        raise UsageError("analyze needs --point with a solution")
    x = read_vector(args.point, "point")
    if x.shape[0] != inst.problem.dimension:
        raise UsageError(f"point has length {x.shape[0]}, expected {inst.problem.dimension}")

    if not math.isfinite(inst.problem.objective(x)):
        print("point is outside the domain of the objective", file=sys.stderr)
        return EXIT_NOT_OPTIMAL
    resid = _optimality_residual(inst.problem, x)
    if resid > _OPTIMALITY_TOL * max(1.0, float(np.max(np.abs(x)))):
        print(f"point is not optimal: prox-gradient residual {resid:.3e}", file=sys.stderr)
        return EXIT_NOT_OPTIMAL

    report = {"active_sets": None, "uniqueness": None, "subregularity": None, "rate": None}
    consistent = True
    try:
        if inst.lasso is not None:
            rep = check_uniqueness(inst.lasso, x)
            act = rep.active
            consistent = rep.consistent
            report["active_sets"] = {"E": act.E, "J": act.J, "K": act.K, "signs": _list(act.signs)}
            report["uniqueness"] = {
                "ii": rep.condition_ii,
                "iii": rep.condition_iii,
                "iv": rep.condition_iv,
                "oracle": rep.oracle_unique,
                "consistent": rep.consistent,
                "a_j_full_rank": rep.a_j_full_rank,
                "slater_point": _list(rep.slater_point),
            }
            grad = act.s
        elif inst.kind == "l1smooth":
            grad = inst.hessian @ x + inst.linear
        if inst.hessian is not None:
            cert = check_strong_subregularity_l1(inst.hessian, grad, x, inst.mu)
            report["subregularity"] = {
                "holds": cert.holds,
                "E": cert.E,
                "J": cert.J,
                "K": cert.K,
                "cone": {str(k): v for k, v in cert.cone_description.items()},
                "modulus_lower_bound": cert.modulus_lower_bound,
            }
    except (InconsistentOptimality, NumericalFailure) as exc:
        print(f"point is not optimal: {exc}", file=sys.stderr)
        return EXIT_NOT_OPTIMAL

    report["rate"] = _rate_report(inst, x, args)
    with _open_out(args.out) as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    if not consistent:
        print("uniqueness checks disagree", file=sys.stderr)
        return EXIT_INCONSISTENT
    return EXIT_OK


def _rate_report(inst, x, args):
    """Tail rate of a fresh run from the default start, measured against ``x``."""
    res = solve(inst.problem, inst.default_start, _config(args, record_certificates=False, keep_iterates=True))
    out = {"status": res.status.value, "iterations": res.iterations}
    try:
        est = estimate_rate(res.log, x, iterates=res.iterates)
    except InsufficientData as exc:
        out.update(fitted_q=None, monotone_q=None, window_start=None, points=None, note=str(exc))
        return out
    out.update(fitted_q=est.fitted_q, monotone_q=est.monotone_q, window_start=est.window_start,
               points=est.points, note=None)
    return out


def cmd_bench(args):
    names = None if args.suite in (None, "all") else [args.suite]
    if args.instances is not None and args.instances < 1:
        raise UsageError("--instances must be positive")
    rows = run_suites(names, seed=args.seed, instances=args.instances)
    with _open_out(args.out) as fh:
        fh.write("suite,criterion,value,threshold,passed,detail\n")
        for r in rows:
            detail = r.detail.replace('"', "'")
            fh.write(f'{r.suite},{r.criterion},{format_number(r.value)},{format_number(r.threshold)},'
                     f'{"true" if r.passed else "false"},"{detail}"\n')
    failed = [r for r in rows if not r.passed]
    for r in failed:
        print(f"FAILED {r.suite}: {r.criterion} (value {format_number(r.value)}; {r.detail})",
              file=sys.stderr)
    return EXIT_SUITE_FAILED if failed else EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad arguments, which collides with MaxIterations
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser():
    parser = _Parser(prog="proxsplit", description="Forward-backward splitting solver and analysis tools.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def problem_args(p):
        p.add_argument("--problem", choices=["lasso", "l1smooth", "poisson"], required=True)
        p.add_argument("--matrix", help="A (lasso, poisson) or H (l1smooth), CSV")
        p.add_argument("--rhs", help="b (lasso, poisson) or c (l1smooth), one-column CSV")
        p.add_argument("--mu", type=float, help="l1 weight")
        p.add_argument("--sigma", type=float, default=1.0, help="initial step size")
        p.add_argument("--theta", type=float, default=0.5, help="backtracking factor")
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--max-iter", type=_positive_int, default=100_000)
        p.add_argument("--out", help="output file (default: standard output)")
        p.add_argument("--seed", type=int, default=42)

    s = sub.add_parser("solve", help="run FBS and write the final point")
    problem_args(s)
    s.add_argument("--point", help="start point, one-column CSV")
    s.add_argument("--log", help="iterate log CSV")

    a = sub.add_parser("analyze", help="active sets, uniqueness, subregularity and rate at a solution")
    problem_args(a)
    a.add_argument("--point", help="solution point, one-column CSV or JSON array")

    b = sub.add_parser("bench", help="run the reproduction suites")
    b.add_argument("--suite", choices=[*SUITES, "all"], default="all")
    b.add_argument("--instances", type=int, help="instance count for the lasso and uniqueness suites")
    b.add_argument("--seed", type=int, default=42)
    b.add_argument("--out", help="summary CSV (default: standard output)")
    return parser


_COMMANDS = {"solve": cmd_solve, "analyze": cmd_analyze, "bench": cmd_bench}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProxSplitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
