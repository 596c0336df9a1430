"""Compare compiled and numpy kernels on regularized-distribution evaluation.

Usage: python benchmarks/bench_kernels.py [--points N] [--repeat R]
"""

import argparse
import time

import numpy as np

from nonclassical import kernels
from nonclassical.depth import depth
from nonclassical.polygauss import as_sum
from nonclassical.quasiprob import regularize
from nonclassical.states import fock, sigma_ansatz, werner_state
from nonclassical.fock import scale_add, embed


def _cases():
    w = werner_state(0.8)
    s = sigma_ansatz(0.7)
    mix = scale_add(0.7, embed(w, s.dims), 0.3, s)
    return {
        "fock1": (fock(1), 0.6),
        "fock8": (fock(8), 0.6),
        "werner": (w, 0.7),
        "werner+sigma": (mix, 0.5),
    }


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(7)
    backends = ["python"]
    try:
        kernels.use_backend("cython")
        backends.append("cython")
    except ImportError:
        print("compiled kernels unavailable; timing the fallback only")
    print(f"{'case':<14}{'kernel':<10}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, (rho, tau) in _cases().items():
        pg = as_sum(regularize(rho, tau))
        z = (rng.normal(size=(args.points, rho.modes)) + 1j * rng.normal(size=(args.points, rho.modes)))
        for label, fn in (("raw", lambda: pg(z)), ("sign", lambda: pg.sign_function(z))):
            times = []
            for b in backends:
                kernels.use_backend(b)
                times.append(_time(fn, args.repeat))
            speed = times[0] / times[-1] if len(times) > 1 else 1.0
            print(f"{name:<14}{label:<10}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times) + f"{speed:>9.1f}x")
    for b in backends:
        kernels.use_backend(b)
        t = _time(lambda: depth(werner_state(0.5)), 1)
        print(f"depth(werner 0.5) with {b} kernels: {t:.2f}s")


if __name__ == "__main__":
    main()
