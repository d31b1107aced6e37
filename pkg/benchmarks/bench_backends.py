"""Compare the numba loop kernels with their numpy counterparts.

Two tables are printed:

* per-kernel timings (``timeit``, best of 5) on the small dense shapes the
  solver sees, and on a larger shape where vectorized numpy catches up;
* end-to-end ISTA and Poisson solves, each run in a subprocess with
  ``PROXSPLIT_BACKEND`` set, so the whole package runs on one backend.

Usage::

    python3 benchmarks/bench_backends.py [--repeat 5]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from proxsplit import kernels

SHAPES = [(5, 8), (50, 80), (400, 600)]

SOLVE_SNIPPET = """
import time
import numpy as np
from proxsplit import ista_solve, poisson_solve, SolverConfig
rng = np.random.default_rng(0)
A = rng.standard_normal((30, 20)); b = rng.standard_normal(30)
P = rng.uniform(0.1, 1.0, (30, 20)); q = rng.uniform(0.5, 2.0, 30)
cfg = SolverConfig(tol=1e-10, record_certificates=False)
ista_solve(A[:2, :2], b[:2], 0.1); poisson_solve(P[:2, :2], q[:2])   # compile
t = time.perf_counter(); r1 = ista_solve(A, b, 0.5, cfg=cfg); t1 = time.perf_counter() - t
t = time.perf_counter(); r2 = poisson_solve(P, q, cfg=cfg); t2 = time.perf_counter() - t
print(t1, r1.iterations, t2, r2.iterations)
"""


def _kernel_calls(shape, rng):
    m, n = shape
    A = rng.uniform(0.1, 1.0, (m, n))
    b = rng.uniform(0.5, 2.0, m)
    x = rng.uniform(0.1, 1.0, n)
    z = rng.standard_normal(n)
    v0 = np.ones(n) / np.sqrt(n)
    T = rng.standard_normal((min(m, 20) + 1, n + min(m, 20) + 1))
    T[1, 2] = 2.0
    return {
        "soft_threshold": (z, 0.3),
        "lasso_grad": (A, b, x),
        "poisson_value": (A, b, x),
        "poisson_grad": (A, b, x),
        "power_iteration": (A, v0, 50, 0.0),
        "pivot": (T, 1, 2),
    }


def bench_kernels(repeat):
    if not kernels.LOOP_KERNELS:
        print("numba backend inactive; only the numpy path is available")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16}{'shape':>12}{'numba [us]':>14}{'numpy [us]':>14}{'speedup':>10}")
    for shape in SHAPES:
        for name, args in _kernel_calls(shape, rng).items():
            row = []
            for table in (kernels.LOOP_KERNELS, kernels.NUMPY_KERNELS):
                fn = table[name]
                fn(*args)  # compile / warm caches
                timer = timeit.Timer(lambda: fn(*args))
                number, _ = timer.autorange()
                row.append(min(timer.repeat(repeat, number)) / number * 1e6)
            print(f"{name:<16}{str(shape):>12}{row[0]:>14.2f}{row[1]:>14.2f}{row[1] / row[0]:>10.2f}")


def bench_solves():
    print(f"\n{'backend':<10}{'ISTA [ms]':>12}{'iters':>8}{'Poisson [ms]':>14}{'iters':>8}")
    for backend in ("numba", "numpy"):
        env = dict(os.environ, PROXSPLIT_BACKEND=backend)
        out = subprocess.run([sys.executable, "-c", SOLVE_SNIPPET], env=env,
                             capture_output=True, text=True, check=True)
        t1, k1, t2, k2 = out.stdout.split()
        print(f"{backend:<10}{float(t1) * 1e3:>12.1f}{k1:>8}{float(t2) * 1e3:>14.1f}{k2:>8}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    bench_kernels(args.repeat)
    bench_solves()


if __name__ == "__main__":
    main()
