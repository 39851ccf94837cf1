"""Hot numeric kernels: gap-aware autocorrelation and lagged cross-correlation.

Both kernels exist twice: a plain-loop version compiled with numba's ``@njit``
and a vectorized pure-numpy fallback. The fallback is selected when numba is
not importable or when the environment variable ``SENSORPROFILER_NO_NUMBA``
is set to a truthy value (``1``, ``true``, ``yes``). ``benchmarks/bench_kernels.py``
compares the two paths.

Missing samples are NaN. Every kernel treats NaN as "absent" and only uses
positions (or position pairs) where all required samples are present.
"""

from __future__ import annotations

import os

import numpy as np

_truthy = {"1", "true", "yes", "on"}
NUMBA_DISABLED = (
    os.environ.get("SENSORPROFILER_NO_NUMBA", "").strip().lower() in _truthy
    or "NUMBA_DISABLE_JIT" in os.environ
)

try:
    if NUMBA_DISABLED:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        # identity decorator so the _nb functions stay importable for tests
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


# ---------------------------------------------------------------------------
# gap-aware autocorrelation
#
# acf[k] = sum over pairs (t, t+k) with both samples present of
#          (x[t] - m) * (x[t+k] - m)
#          / sum over all present t of (x[t] - m)^2
# with m the mean of the present samples. acf[0] == 1 by construction.


def _acf_gaps_np(x: np.ndarray, max_lag: int) -> np.ndarray:
    present = ~np.isnan(x)
    n_present = int(present.sum())
    if n_present == 0:
        return np.full(max_lag + 1, np.nan)
    mean = x[present].mean()
    dev = np.where(present, x - mean, 0.0)
    denom = float(np.dot(dev[present], dev[present]))
    if denom == 0.0:
        return np.full(max_lag + 1, np.nan)
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    n = x.size
    for k in range(1, max_lag + 1):
        if k >= n:
            out[k] = 0.0
            continue
        out[k] = float(np.dot(dev[:-k], dev[k:])) / denom
    return out


@njit(cache=True)
def _acf_gaps_nb(x: np.ndarray, max_lag: int) -> np.ndarray:  # pragma: no cover
    n = x.size
    total = 0.0
    count = 0
    for i in range(n):
        if not np.isnan(x[i]):
            total += x[i]
            count += 1
    out = np.full(max_lag + 1, np.nan)
    if count == 0:
        return out
    mean = total / count
    # zero-filled deviations make absent pairs contribute nothing
    dev = np.empty(n)
    denom = 0.0
    for i in range(n):
        if np.isnan(x[i]):
            dev[i] = 0.0
        else:
            d = x[i] - mean
            dev[i] = d
            denom += d * d
    if denom == 0.0:
        return out
    out[0] = 1.0
    for k in range(1, max_lag + 1):
        num = 0.0
        for t in range(n - k):
            num += dev[t] * dev[t + k]
        out[k] = num / denom
    return out


# ---------------------------------------------------------------------------
# lagged cross-correlation scan
#
# For each delay k in [-K, K], Pearson correlation between x[t] and y[t+k]
# over the positions where both samples are present. The scan visits delays
# in the order 0, -1, +1, -2, +2, ... and keeps strictly greater values, so
# ties resolve to the smallest |k| and, within equal |k|, to the negative
# delay. Returns (best_value, best_lag, defined_flag). A delay contributes
# only if its overlap has >= min_overlap pairs and both slices vary.


def _scan_order(max_delay: int) -> np.ndarray:
    order = [0]
    for k in range(1, max_delay + 1):
        order.append(-k)
        order.append(k)
    return np.asarray(order, dtype=np.int64)


def _xcorr_scan_np(
    x: np.ndarray,
    y: np.ndarray,
    max_delay: int,
    min_overlap: int,
    use_abs: bool,
) -> tuple[float, int, bool]:
    n = x.size
    best_val = -np.inf
    best_key = -np.inf
    best_lag = 0
    found = False
    for k in _scan_order(max_delay):
        lo = max(0, -k)
        hi = min(n, n - k)
        if hi - lo < min_overlap:
            continue
        xs = x[lo:hi]
        ys = y[lo + k : hi + k]
        both = ~(np.isnan(xs) | np.isnan(ys))
        c = int(both.sum())
        if c < min_overlap:
            continue
        xv = xs[both]
        yv = ys[both]
        sx = xv.sum()
        sy = yv.sum()
        sxx = float(np.dot(xv, xv))
        syy = float(np.dot(yv, yv))
        sxy = float(np.dot(xv, yv))
        vx = sxx - sx * sx / c
        vy = syy - sy * sy / c
        if vx <= 0.0 or vy <= 0.0:
            continue
        r = (sxy - sx * sy / c) / np.sqrt(vx * vy)
        key = abs(r) if use_abs else r
        if key > best_key:
            best_key = key
            best_val = r
            best_lag = int(k)
            found = True
    return float(best_val), best_lag, found


@njit(cache=True)
def _xcorr_scan_nb(
    x: np.ndarray,
    y: np.ndarray,
    order: np.ndarray,
    min_overlap: int,
    use_abs: bool,
) -> tuple[float, int, bool]:  # pragma: no cover
    n = x.size
    best_val = -np.inf
    best_key = -np.inf
    best_lag = 0
    found = False
    for idx in range(order.size):
        k = order[idx]
        lo = max(0, -k)
        hi = min(n, n - k)
        if hi - lo < min_overlap:
            continue
        c = 0
        sx = 0.0
        sy = 0.0
        sxx = 0.0
        syy = 0.0
        sxy = 0.0
        for t in range(lo, hi):
            a = x[t]
            b = y[t + k]
            if np.isnan(a) or np.isnan(b):
                continue
            c += 1
            sx += a
            sy += b
            sxx += a * a
            syy += b * b
            sxy += a * b
        if c < min_overlap:
            continue
        vx = sxx - sx * sx / c
        vy = syy - sy * sy / c
        if vx <= 0.0 or vy <= 0.0:
            continue
        r = (sxy - sx * sy / c) / np.sqrt(vx * vy)
        key = abs(r) if use_abs else r
        if key > best_key:
            best_key = key
            best_val = r
            best_lag = int(k)
            found = True
    return best_val, best_lag, found


def acf_gaps(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Autocorrelation up to ``max_lag`` on a series with NaN gaps.

    Returns an array of ``max_lag + 1`` values with index = lag; all NaN
    when the present samples are empty or constant.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if HAVE_NUMBA:
        return _acf_gaps_nb(x, int(max_lag))
    return _acf_gaps_np(x, int(max_lag))


def xcorr_scan(
    x: np.ndarray,
    y: np.ndarray,
    max_delay: int,
    min_overlap: int = 3,
    use_abs: bool = False,
) -> tuple[float, int, bool]:
    """Best delayed correlation between two equally indexed series.

    Scans delays -max_delay..max_delay and returns (value, delay, defined).
    ``defined`` is False when no delay has enough overlapping, non-constant
    samples.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if HAVE_NUMBA:
        val, lag, found = _xcorr_scan_nb(
            x, y, _scan_order(int(max_delay)), int(min_overlap), bool(use_abs)
        )
        return float(val), int(lag), bool(found)
    return _xcorr_scan_np(x, y, int(max_delay), int(min_overlap), bool(use_abs))
