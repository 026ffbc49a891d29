"""numba vs pure-numpy timings for the hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat N] [--end-to-end]

Each kernel runs once to warm the JIT, then the best of N runs is kept.
``--end-to-end`` also times a full weakly-parallel trace in two fresh
interpreters, one with EQUIDIST_PURE_NUMPY=1.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from equidist import _numba_kernels as nb
from equidist import _numpy_kernels as npk
from equidist.jets import _product_table, n_coeffs


def best_of(fn, repeat):
    fn()  # warm-up / compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    order = 6
    I, J, K = _product_table(order)
    nc = n_coeffs(order)
    a = rng.standard_normal((nc, 8192))
    b = rng.standard_normal((nc, 8192))
    mats = rng.standard_normal((200_000, 4, 4))
    grid = rng.standard_normal((800, 800))
    cases_ = npk.cell_cases(grid, False, False)
    centre = rng.random(cases_.shape) < 0.5
    field4 = rng.standard_normal((24, 24, 24, 24))
    zero = np.zeros(field4.shape, dtype=bool)
    excl = rng.random(field4.shape) < 0.05
    per = (True, True, True, True)
    return {
        "jet_mul order 6 x 8192": lambda m: m.jet_mul(a, b, I, J, K, nc),
        "det4 x 200k": lambda m: m.det4(mats),
        "cell_cases 800^2": lambda m: m.cell_cases(grid, False, False),
        "segments 800^2": lambda m: m.segments_from_cases(cases_, centre, 800, 800),
        "sign_change_edges 24^4": lambda m: m.sign_change_edges(field4, zero, excl, per),
    }


TRACE = ("import time, math; from equidist.torus import builtin_torus; "
         "from equidist.tracer import trace_wp; T = builtin_torus(); "
         "trace_wp(T, (math.pi, math.pi), 60); t = time.perf_counter(); "
         "trace_wp(T, (math.pi, math.pi), 400); print(time.perf_counter() - t)")


def end_to_end():
    out = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, EQUIDIST_PURE_NUMPY=flag)
        res = subprocess.run([sys.executable, "-c", TRACE], env=env, capture_output=True,
                             text=True, check=True)
        out[label] = float(res.stdout.strip().splitlines()[-1])
    return out


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args(argv)
    rng = np.random.default_rng(1)
    print(f"{'kernel':28s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speed-up':>9s}")
    for name, fn in cases(rng).items():
        t_np = best_of(lambda: fn(npk), args.repeat)
        t_nb = best_of(lambda: fn(nb), args.repeat)
        print(f"{name:28s} {1e3 * t_np:11.2f} {1e3 * t_nb:11.2f} {t_np / t_nb:8.1f}x")
    if args.end_to_end:
        t = end_to_end()
        print(f"{'trace_wp torus 400^2':28s} {1e3 * t['numpy']:11.1f} {1e3 * t['numba']:11.1f} "
              f"{t['numpy'] / t['numba']:8.1f}x")


if __name__ == "__main__":
    main()
