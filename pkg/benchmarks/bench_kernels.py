"""Time the numba kernels against their numpy fallbacks.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--end-to-end]

Kernel timings call both implementations directly (after one warm-up call so
compilation is excluded). ``--end-to-end`` additionally solves a ladder
instance in two subprocesses, with and without ``WILLMORE_ILP_DISABLE_JIT``.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from willmore_ilp import _accel
from willmore_ilp.lattice import LatticeSpec, _triples_jit, _triples_numpy
from willmore_ilp.solver._kernels import (_dual_ratio_jit, _dual_ratio_numpy, _eta_update_jit,
                                          _eta_update_numpy, _ratio_jit, _ratio_numpy)
from willmore_ilp.tu import _bareiss_jit, _bareiss_numpy, _schur_pivot_jit, _schur_pivot_numpy


def best_of(fn, setup, repeat):
    fn(*setup())
    times = []
    for _ in range(repeat):
        args = setup()
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    m = 600
    binv = rng.standard_normal((m, m))
    alpha = rng.standard_normal(m)
    alpha[rng.random(m) < 0.9] = 0.0
    alpha[7] = 1.5
    yield "eta_update 600x600", _eta_update_jit, _eta_update_numpy, lambda: (binv.copy(), alpha, 7)

    n = 20000
    xb = rng.random(n)
    lb, ub = np.zeros(n), np.ones(n)
    al = rng.standard_normal(n)
    basis = np.arange(n, dtype=np.int64)
    yield ("ratio_test n=20000", _ratio_jit, _ratio_numpy,
           lambda: (xb, lb, ub, al, 1.0, basis, 1e-9, 1e-12, False))

    d = rng.random(n)
    arow = rng.standard_normal(n)
    movable = rng.random(n) < 0.7
    at_upper = rng.random(n) < 0.3
    yield ("dual_ratio n=20000", _dual_ratio_jit, _dual_ratio_numpy,
           lambda: (d, arow, movable, at_upper, True, 1e-9))

    pts = LatticeSpec(2, (2, 2, 2)).lattice_points()
    yield "triples 27 points", _triples_jit, _triples_numpy, lambda: (pts, 2.0 + 1e-9)

    mat = rng.integers(-1, 2, size=(18, 18)).astype(np.int64)
    yield "bareiss 18x18", _bareiss_jit, _bareiss_numpy, lambda: (mat,)

    big = rng.integers(-1, 2, size=(400, 400)).astype(np.int64)
    yield "schur_pivot 400x400", _schur_pivot_jit, _schur_pivot_numpy, lambda: (big.copy(), 3, 5)


END_TO_END = (
    "from willmore_ilp.experiments import LADDER, run_rung\n"
    "import time; t=time.perf_counter(); r=run_rung(LADDER[3]); "
    "print(f'{time.perf_counter()-t:.3f} {r.lp_objective:.9f}')"
)


def end_to_end():
    out = {}
    for label, flag in (("jit", "0"), ("numpy", "1")):
        env = dict(os.environ, WILLMORE_ILP_DISABLE_JIT=flag)
        res = subprocess.run([sys.executable, "-c", END_TO_END], env=env,
                             capture_output=True, text=True, check=True)
        secs, obj = res.stdout.split()
        out[label] = (float(secs), obj)
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        sys.exit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    print(f"{'kernel':24s} {'jit [ms]':>10s} {'numpy [ms]':>11s} {'speedup':>8s}")
    for name, jit_fn, np_fn, setup in cases(rng):
        tj = best_of(jit_fn, setup, args.repeat)
        tn = best_of(np_fn, setup, args.repeat)
        print(f"{name:24s} {tj * 1e3:10.3f} {tn * 1e3:11.3f} {tn / tj:8.2f}")

    if args.end_to_end:
        res = end_to_end()
        for label, (secs, obj) in res.items():
            print(f"n2-cup lp ({label}): {secs:.3f} s objective {obj}")


if __name__ == "__main__":
    main()
