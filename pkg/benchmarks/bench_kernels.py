"""Compare the compiled and numpy kernels on the nested Monte Carlo workload.

    python benchmarks/bench_kernels.py [--n 100000] [--repeat 3]

The workload per family is one batch of the marginal-entropy estimator:
n/20 outcomes against floor(sqrt(n)) parameter draws.
"""

import argparse
import math
import time

import numpy as np

from uqreg import _pykernels

try:
    from uqreg import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def workload(code, n, gen):
    m, k = n // 20, math.isqrt(n)
    if code == 0:
        params = np.column_stack([gen.normal(size=k), gen.gamma(2.0, size=k)])
        y = gen.normal(size=m) * 2.0
    elif code == 1:
        params = gen.gamma(2.0, size=(k, 1))
        y = gen.exponential(size=m)
    else:
        params = gen.gamma(3.0, size=(k, 1))
        y = gen.poisson(3.0, size=m).astype(float)
    return y, params


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    gen = np.random.default_rng(0)
    print(f"{'family':12s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s} {'max |diff|':>11s}")
    for code, name in enumerate(("gaussian", "exponential", "poisson")):
        y, params = workload(code, args.n, gen)
        tp = best_time(lambda: _pykernels.log_mean_density(code, y, params), args.repeat)
        if _ckernels is None:
            print(f"{name:12s} {tp * 1e3:12.2f} {'n/a':>12s}")
            continue
        tc = best_time(lambda: _ckernels.log_mean_density(code, y, params), args.repeat)
        diff = np.max(np.abs(_pykernels.log_mean_density(code, y, params) - _ckernels.log_mean_density(code, y, params)))
        print(f"{name:12s} {tp * 1e3:12.2f} {tc * 1e3:12.2f} {tp / tc:8.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()
