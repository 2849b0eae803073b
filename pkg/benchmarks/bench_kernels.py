"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

Numba compile time is excluded by a warm-up call.
"""
import argparse
import time

import numpy as np

from qcorr import kernels
from qcorr._jit import NUMBA_AVAILABLE
from qcorr.noise import NoiseSpec, draw_correlated, draw_uncorrelated
from qcorr.simulator import build_timeline, random_circuit


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def propagation_case(family, reps=200):
    c = random_circuit(100, 0, 0)
    tl = build_timeline(c, family)
    spec = NoiseSpec(2e-3, 5e-4)
    rng = np.random.default_rng(0)
    d_s = np.stack([draw_uncorrelated(spec, tl.duration, rng) for _ in range(reps)])
    d_l = np.stack([draw_correlated(spec, 100, rng) for _ in range(reps)])
    return tl.args() + (d_s, d_l)


def variance_case(k=50, n=200, perms=1000):
    rng = np.random.default_rng(1)
    p = rng.random((k, n))
    return p, np.stack([rng.permutation(n) for _ in range(perms)])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed")
    cases = [
        ("propagate primitive J=100 x200", kernels.propagate_timeline_numba,
         kernels.propagate_timeline_numpy, propagation_case("primitive")),
        ("propagate corpse J=100 x200", kernels.propagate_timeline_numba,
         kernels.propagate_timeline_numpy, propagation_case("corpse")),
        ("variance k=50 n=200 x1000", kernels.cumulative_variances_numba,
         kernels.cumulative_variances_numpy, variance_case()),
    ]
    print(f"{'case':34s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}")
    for name, fast, slow, inputs in cases:
        a, b = fast(*inputs), slow(*inputs)  # first call also compiles
        a, b = (a, b) if isinstance(a, tuple) else ((a,), (b,))
        for x, y in zip(a, b):
            np.testing.assert_allclose(x, y, rtol=1e-9, atol=1e-12)
        tf = best_of(lambda: fast(*inputs), args.repeat)
        ts = best_of(lambda: slow(*inputs), args.repeat)
        print(f"{name:34s} {tf:10.4f} {ts:10.4f} {ts / tf:7.1f}x")


if __name__ == "__main__":
    main()
