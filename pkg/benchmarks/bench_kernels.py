"""Compare the numba and pure-numpy kernels.

    python benchmarks/bench_kernels.py [--rows 1000] [--trees 300] [--repeat 5]

Prints best-of-``repeat`` wall time per workload and the speedup.  The numba
column is skipped when numba is unavailable or disabled.
"""

import argparse
import time

import numpy as np

from paretogp import _kernels
from paretogp.expr import TreeConfig, compile_tree, random_individual


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=1000)
    ap.add_argument("--trees", type=int, default=300)
    ap.add_argument("--points", type=int, default=600)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    cfg = TreeConfig(n_variables=16)
    progs = [compile_tree(random_individual(cfg, rng, 6)) for _ in range(args.trees)]
    X = rng.uniform(-10, 10, (args.rows, 16))
    F = np.column_stack([rng.integers(1, 300, args.points), rng.random(args.points),
                         rng.integers(0, 50, args.points)]).astype(np.float64)

    work = {
        f"evaluate {args.trees} trees x {args.rows} rows":
            (lambda ev: [ev(*p, X) for p in progs],
             _kernels.eval_program_numpy, getattr(_kernels, "eval_program_numba", None)),
        f"dominance matrix {args.points} x 3":
            (lambda dm: dm(F), _kernels.dominance_matrix_numpy,
             getattr(_kernels, "dominance_matrix_numba", None)),
    }
    print(f"backend in use: {_kernels.BACKEND}")
    print(f"{'workload':42s} {'numpy s':>10s} {'numba s':>10s} {'speedup':>8s}")
    for name, (run, np_fn, nb_fn) in work.items():
        t_np = best_time(lambda: run(np_fn), args.repeat)
        if nb_fn is None:
            print(f"{name:42s} {t_np:10.4f} {'-':>10s} {'-':>8s}")
            continue
        run(nb_fn)  # compile outside the timing
        t_nb = best_time(lambda: run(nb_fn), args.repeat)
        print(f"{name:42s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
