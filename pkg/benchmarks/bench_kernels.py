"""Benchmark the compiled kernels against the NumPy fallback.

Run as:  python3 benchmarks/bench_kernels.py [--repeat N]

Times the three elementwise hot kernels on factorization-sized matrices,
the direct autocorrelation on signal-sized vectors, and a full multilayer
sweep through each backend, reporting best-of-N wall times and the largest
numeric deviation between the backends.
"""

import argparse
import importlib
import time

import numpy as np

from cardiosep.kernels import fallback

try:
    _accel = importlib.import_module("cardiosep.kernels._accel")
except ImportError:
    _accel = None

FLOOR = 1e-12


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_elementwise(repeat, rows=2, cols=200_000, alpha=0.5):
    rng = np.random.default_rng(0)
    y = rng.uniform(0.1, 2.0, (rows, cols))
    yhat = rng.uniform(0.1, 2.0, (rows, cols))
    q = rng.uniform(0.5, 1.5, (rows, cols))
    cases = [
        ("ratio_pow", lambda impl: impl.ratio_pow(y, yhat, alpha, FLOOR)),
        ("mul_pow", lambda impl: impl.mul_pow(y, q, 1.0 / alpha, FLOOR)),
        ("alpha_div_sum", lambda impl: impl.alpha_div_sum(y, yhat, alpha, FLOOR)),
    ]
    print(f"\nelementwise kernels on {rows}x{cols} float64, alpha={alpha}")
    for name, call in cases:
        t_np = best_of(lambda: call(fallback), repeat)
        line = f"  {name:14s} numpy {t_np * 1e3:8.2f} ms"
        if _accel is not None:
            t_cy = best_of(lambda: call(_accel), repeat)
            a, b = call(_accel), call(fallback)
            dev = np.max(np.abs(np.asarray(a) - np.asarray(b)))
            line += (
                f"   cython {t_cy * 1e3:8.2f} ms   speedup {t_np / t_cy:5.2f}x"
                f"   max|diff| {dev:.2e}"
            )
        print(line)


def bench_acf(repeat, length=8_000):
    rng = np.random.default_rng(1)
    x = rng.normal(size=length)
    print(f"\ndirect autocorrelation on {length} samples (O(T^2))")
    t_np = best_of(lambda: fallback.acf_all_lags(x), repeat)
    line = f"  acf_all_lags   numpy {t_np * 1e3:8.2f} ms"
    if _accel is not None:
        t_cy = best_of(lambda: _accel.acf_all_lags(x), repeat)
        dev = np.max(np.abs(_accel.acf_all_lags(x) - fallback.acf_all_lags(x)))
        line += (
            f"   cython {t_cy * 1e3:8.2f} ms   speedup {t_np / t_cy:5.2f}x"
            f"   max|diff| {dev:.2e}"
        )
    print(line)


def bench_pass(repeat, cols=50_000, sweeps=20):
    """Full single-layer sweeps with each backend swapped in."""
    from cardiosep import kernels
    from cardiosep.nmf import IterationControls, PassParams, run_plnmf_pass

    rng = np.random.default_rng(2)
    y = rng.uniform(0.1, 1.0, (2, 2)) @ rng.uniform(0.1, 1.0, (2, cols))
    params = PassParams(lambda1=1.0, lambda2=0.0, alpha=0.5, layers=1)
    ctrl = IterationControls(max_iter=sweeps, rel_tol=0.0, seed=3)

    def run():
        run_plnmf_pass(y, params, ctrl)

    backends = [("numpy", fallback)] + ([("cython", _accel)] if _accel else [])
    print(f"\n{sweeps} factorization sweeps on a 2x{cols} mixture")
    saved = {n: getattr(kernels, n) for n in
             ("ratio_pow", "mul_pow", "alpha_div_sum", "acf_all_lags")}
    times = {}
    try:
        for label, impl in backends:
            for name in saved:
                setattr(kernels, name, getattr(impl, name))
            times[label] = best_of(run, repeat)
            print(f"  backend {label:6s} {times[label] * 1e3:8.2f} ms")
    finally:
        for name, fn in saved.items():
            setattr(kernels, name, fn)
    if "cython" in times:
        print(f"  end-to-end speedup {times['numpy'] / times['cython']:5.2f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _accel is None:
        print("compiled extension not available; timing the NumPy fallback only")
    bench_elementwise(args.repeat)
    bench_acf(args.repeat)
    bench_pass(args.repeat)


if __name__ == "__main__":
    main()
