"""Compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 200000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from logconvex import kernels
from logconvex.kernels import _pykernels as pure

try:
    from logconvex.kernels import _ckernels as compiled
except ImportError:
    compiled = None


def _random_convex(rng, pieces):
    breaks = np.cumsum(rng.uniform(0.1, 5.0, pieces - 1))
    slopes = np.sort(rng.uniform(-3.0, 0.0, pieces))
    icpt = np.zeros(pieces)
    for k in range(1, pieces):
        icpt[k] = (slopes[k - 1] - slopes[k]) * breaks[k - 1] + icpt[k - 1]
    return breaks, slopes, icpt


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--pieces", type=int, default=64)
    ap.add_argument("--quad", type=int, default=200, help="number of quadrature calls")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    breaks, slopes, icpt = _random_convex(rng, args.pieces)
    xs = rng.uniform(0.0, breaks[-1] * 1.5, args.n)
    bs = np.linspace(1.0, breaks[-1] * 2, args.n)
    quads = [(rng.uniform(-5, -0.01), rng.uniform(-3, 3), *sorted(rng.uniform(0, 40, 2))) for _ in range(args.quad)]

    cases = {
        "eval_pwl": lambda mod: mod.eval_pwl(breaks, slopes, icpt, xs),
        "grid_max_phi": lambda mod: mod.grid_max_phi(breaks, slopes, icpt, 1.5, bs),
        "gk_quad_exp": lambda mod: [mod.gk_quad_exp(*q) for q in quads],
    }
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'kernel':<14} {'numpy [s]':>12} {'cython [s]':>12} {'speedup':>9}")
    for name, run in cases.items():
        tp = _time(lambda: run(pure), args.repeat)
        if compiled is None:
            print(f"{name:<14} {tp:>12.5f} {'n/a':>12} {'':>9}")
            continue
        tc = _time(lambda: run(compiled), args.repeat)
        # same answers from both backends
        a, b = run(pure), run(compiled)
        if name == "eval_pwl":
            assert np.allclose(a, b, rtol=1e-15, atol=0)
        print(f"{name:<14} {tp:>12.5f} {tc:>12.5f} {tp / tc:>8.1f}x")


if __name__ == "__main__":
    main()
