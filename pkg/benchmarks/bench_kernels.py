"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--reps N] [--repeat R]
"""

import argparse
import time

import numpy as np

from deltaspec.experiments import _kernels as K


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=2000)
    ap.add_argument("--pool", type=int, default=400)
    ap.add_argument("--mutants", type=int, default=60)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    kills = rng.random((args.pool, args.mutants)) < 0.05
    picks = np.stack([rng.choice(args.pool, 10, replace=False) for _ in range(args.reps)])
    sizes = np.full(args.reps, 10)
    orders = np.stack([rng.permutation(args.pool) for _ in range(args.reps)])
    ranks = rng.random(16).argsort().argsort() + 1.0
    xs, ys = rng.random(3000), rng.random(3000)

    cases = {
        "coverage_counts": lambda jit: K.coverage_counts(kills, picks, sizes, jit=jit),
        "draws_to_target": lambda jit: K.draws_to_target(kills, orders, args.mutants // 2, jit=jit),
        "mwu_null(16,8)": lambda jit: K.mwu_null(ranks, 8, jit=jit),
        "pair_counts": lambda jit: K.pair_counts(xs, ys, jit=jit),
    }
    print(f"numba available: {K.njit is not None}; default path: {'jit' if K.USE_JIT else 'numpy'}")
    print(f"{'kernel':<18} {'numpy s':>10} {'jit s':>10} {'speedup':>8}")
    for name, fn in cases.items():
        t_np = _best(lambda: fn(False), args.repeat)
        if K.njit is not None:
            fn(True)  # compile
            t_jit = _best(lambda: fn(True), args.repeat)
            same = np.array_equal(np.asarray(fn(True)), np.asarray(fn(False)))
            print(f"{name:<18} {t_np:>10.4f} {t_jit:>10.4f} {t_np / t_jit:>7.1f}x{'' if same else '  MISMATCH'}")
        else:
            print(f"{name:<18} {t_np:>10.4f} {'n/a':>10}")


if __name__ == "__main__":
    main()
