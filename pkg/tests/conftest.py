"""Shared fixtures and brute-force oracles.

The oracles re-derive every statistic from its direct definition (explicit
loops, math.fsum accumulation) so they stay independent of the vectorized
and jitted production paths they check.
"""

from __future__ import annotations

import math
from math import fsum

import numpy as np
import pytest

from sensorprofiler.types import TimedSeries


def series(values, interval=10.0, start=0.0, kind="continuous", categories=()):
    values = [np.nan if v is None else v for v in values]
    ts = start + interval * np.arange(len(values))
    return TimedSeries(np.asarray(ts, float), np.asarray(values, float), kind, categories)


def cat_series(tokens, interval=10.0, start=0.0):
    """Categorical series from raw tokens; None marks missing."""
    seen: dict[str, int] = {}
    codes = []
    for tok in tokens:
        if tok is None:
            codes.append(np.nan)
            continue
        if tok not in seen:
            seen[tok] = len(seen)
        codes.append(float(seen[tok]))
    return series(codes, interval=interval, kind="categorical", categories=tuple(seen))


# ---------------------------------------------------------------------------
# oracles


def quantile_oracle(xs, p):
    s = sorted(xs)
    h = (len(s) - 1) * p
    lo = math.floor(h)
    hi = math.ceil(h)
    return s[lo] + (s[hi] - s[lo]) * (h - lo)


def moments_oracle(xs):
    """(mean, std, skewness, excess kurtosis) by direct summation."""
    n = len(xs)
    mean = fsum(xs) / n
    m2 = fsum((v - mean) ** 2 for v in xs) / n
    if m2 == 0.0:
        return mean, 0.0, None, None
    m3 = fsum((v - mean) ** 3 for v in xs) / n
    m4 = fsum((v - mean) ** 4 for v in xs) / n
    return mean, math.sqrt(m2), m3 / m2**1.5, m4 / m2**2 - 3.0


def outlier_oracle(xs, c=1.5):
    """Indices of values strictly outside the quartile fences."""
    q1 = quantile_oracle(xs, 0.25)
    q3 = quantile_oracle(xs, 0.75)
    iqr = q3 - q1
    lower = q1 - c * iqr
    upper = q3 + c * iqr
    return [i for i, v in enumerate(xs) if v < lower or v > upper], lower, upper


def acf_oracle(xs, max_lag):
    """Gap-aware lagged self-correlation; xs uses None for missing."""
    present = [v for v in xs if v is not None]
    mean = fsum(present) / len(present)
    denom = fsum((v - mean) ** 2 for v in present)
    if denom == 0.0:
        return None
    out = [1.0]
    n = len(xs)
    for k in range(1, max_lag + 1):
        num = fsum(
            (xs[t] - mean) * (xs[t + k] - mean)
            for t in range(n - k)
            if xs[t] is not None and xs[t + k] is not None
        )
        out.append(num / denom)
    return out


def pearson_oracle(pairs):
    """Plain correlation from (x, y) pairs; None when degenerate."""
    n = len(pairs)
    if n < 3:
        return None
    mx = fsum(p[0] for p in pairs) / n
    my = fsum(p[1] for p in pairs) / n
    vx = fsum((p[0] - mx) ** 2 for p in pairs)
    vy = fsum((p[1] - my) ** 2 for p in pairs)
    if vx <= 0 or vy <= 0:
        return None
    cov = fsum((p[0] - mx) * (p[1] - my) for p in pairs)
    return cov / math.sqrt(vx * vy)


def spike_oracle(xs, k):
    """Interior same-sign double-step rule with the leave-out dispersion."""
    d = [xs[i + 1] - xs[i] for i in range(len(xs) - 1)]
    hits = []
    for i in range(1, len(xs) - 1):
        left = xs[i] - xs[i - 1]
        right = xs[i] - xs[i + 1]
        if left * right <= 0:
            continue
        pool = [d[j] for j in range(len(d)) if j not in (i - 1, i)]
        if not pool:
            pool = d
        m = fsum(pool) / len(pool)
        sigma = math.sqrt(fsum((v - m) ** 2 for v in pool) / len(pool))
        if abs(left) > k * sigma and abs(right) > k * sigma:
            hits.append(i)
    return hits


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
