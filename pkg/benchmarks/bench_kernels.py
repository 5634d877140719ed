"""Time each kernel on its numba and numpy paths.

    python3 benchmarks/bench_kernels.py [--n 100000] [--repeat 5]

The numba timings exclude the first (compiling) call.  Both paths are
checked to agree before timing.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from oddsprob import kernels
from oddsprob.odds_core import SHIN_MAX_ITER
from oddsprob.synthetic import powerlaw_markets, random_inverse_odds


def _best_of(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(n):
    rng = np.random.default_rng(0)
    inv = random_inverse_odds(rng, n, 3)
    odds, outcomes = powerlaw_markets(n, [1.1, 1.1, 1.1], seed=1)
    log_inv = np.log(1.0 / odds)
    diff = rng.normal(0.0, 1.0, n // 10)
    idx = rng.integers(0, diff.size, size=(256, diff.size))
    return {
        "shin_numerical": (inv, 1e-12, SHIN_MAX_ITER, kernels.SOLVER_AUTO),
        "shin_analytical": (inv, 1.0),
        "power": (inv, 1.0),
        "powerlaw_loglik": (log_inv, outcomes, np.full(3, 1.1)),
        "resample_sign_counts": (diff, idx),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100_000, help="markets per call")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not kernels.NUMBA:
        print("numba not installed; only the numpy path is timed")
    print(f"{'kernel':<22}{'numpy [ms]':>12}{'numba [ms]':>12}{'speed-up':>10}")
    for name, case in _cases(args.n).items():
        np_fn = kernels.NUMPY[name]
        t_np = _best_of(np_fn, case, args.repeat)
        if kernels.NUMBA:
            nb_fn = kernels.NUMBA[name]
            ref, got = np_fn(*case), nb_fn(*case)
            ref = ref if isinstance(ref, tuple) else (ref,)
            got = got if isinstance(got, tuple) else (got,)
            for a, b in zip(ref, got):
                np.testing.assert_allclose(np.asarray(a, float), np.asarray(b, float), rtol=1e-9, atol=1e-9)
            t_nb = _best_of(nb_fn, case, args.repeat)
            print(f"{name:<22}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>9.1f}x")
        else:
            print(f"{name:<22}{1e3 * t_np:>12.2f}{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
