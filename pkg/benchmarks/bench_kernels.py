#!/usr/bin/env python3
"""Benchmark the jitted kernels against their pure-numpy fallbacks.

Run:  python benchmarks/bench_kernels.py [--n 1000000] [--repeats 3]

The same selection logic as the package applies at import time, so running
with SENSORPROFILER_NO_NUMBA=1 shows what the fallback deployment pays.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from sensorprofiler import kernels


def timed(fn, *args, repeats: int = 3) -> float:
    fn(*args)  # warm-up (and jit compile)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=1_000_000)
    parser.add_argument("--max-lag", type=int, default=60)
    parser.add_argument("--max-delay", type=int, default=30)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--gap-rate", type=float, default=0.03)
    args = parser.parse_args()

    rng = np.random.default_rng(7)
    x = rng.normal(0, 1, args.n)
    y = 0.5 * x + rng.normal(0, 1, args.n)
    x[rng.random(args.n) < args.gap_rate] = np.nan
    y[rng.random(args.n) < args.gap_rate] = np.nan

    rows = [("kernel", "numpy fallback", "numba njit", "speedup")]

    t_np = timed(kernels._acf_gaps_np, x, args.max_lag, repeats=args.repeats)
    if kernels.HAVE_NUMBA:
        t_nb = timed(kernels._acf_gaps_nb, x, args.max_lag, repeats=args.repeats)
        rows.append(("acf_gaps", f"{t_np:.3f}s", f"{t_nb:.3f}s", f"{t_np / t_nb:.1f}x"))
    else:
        rows.append(("acf_gaps", f"{t_np:.3f}s", "unavailable", "-"))

    order = kernels._scan_order(args.max_delay)
    t_np = timed(
        kernels._xcorr_scan_np, x, y, args.max_delay, 3, False, repeats=args.repeats
    )
    if kernels.HAVE_NUMBA:
        t_nb = timed(kernels._xcorr_scan_nb, x, y, order, 3, False, repeats=args.repeats)
        rows.append(("xcorr_scan", f"{t_np:.3f}s", f"{t_nb:.3f}s", f"{t_np / t_nb:.1f}x"))
    else:
        rows.append(("xcorr_scan", f"{t_np:.3f}s", "unavailable", "-"))

    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    print(f"n={args.n}  max_lag={args.max_lag}  max_delay={args.max_delay}  gaps={args.gap_rate:.0%}")
    print(f"numba available: {kernels.HAVE_NUMBA}  (flag disabled: {kernels.NUMBA_DISABLED})")
    for r in rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(r, widths)))


if __name__ == "__main__":
    main()
