"""Stage 1: duplicate timestamps, interval regularity, and grid alignment."""

from __future__ import annotations

import numpy as np

from .types import (
    CATEGORICAL,
    ConfigError,
    DuplicateGroup,
    DuplicateReport,
    IntervalReport,
    RegularGrid,
    TimedSeries,
)


def detect_duplicates(s: TimedSeries) -> DuplicateReport:
    """Group rows sharing a timestamp; a group is DTS when every non-missing
    value in it is equal, DTD otherwise."""
    ts = s.timestamps
    groups: list[DuplicateGroup] = []
    dts = dtd = 0
    if ts.size:
        uniq, starts, counts = np.unique(ts, return_index=True, return_counts=True)
        for t, start, count in zip(uniq, starts, counts):
            if count < 2:
                continue
            rows = list(range(int(start), int(start + count)))
            vals = s.values[start : start + count]
            present = vals[~np.isnan(vals)]
            same = bool(present.size == 0 or np.all(present == present[0]))
            groups.append(DuplicateGroup(float(t), rows, same))
            if same:
                dts += 1
            else:
                dtd += 1
    return DuplicateReport(dts=dts, dtd=dtd, groups=groups)


def resolve_duplicates(s: TimedSeries, policy: str = "median") -> TimedSeries:
    """Collapse duplicate timestamps to one row each.

    Same-value groups keep the shared value. Different-value groups merge per
    ``policy`` (mean/median over the non-missing values); categorical series
    always keep the first value. All-missing groups stay missing.
    """
    if policy not in ("first", "mean", "median"):
        raise ValueError(f"unknown policy {policy!r}")
    ts = s.timestamps
    if ts.size == 0:
        return TimedSeries(ts.copy(), s.values.copy(), kind=s.kind, categories=s.categories)
    uniq, starts, counts = np.unique(ts, return_index=True, return_counts=True)
    out = s.values[starts].copy()
    effective = "first" if s.kind == CATEGORICAL else policy
    for i in np.flatnonzero(counts > 1):
        group = s.values[starts[i] : starts[i] + counts[i]]
        present = group[~np.isnan(group)]
        if present.size == 0:
            out[i] = np.nan
        elif np.all(present == present[0]) or effective == "first":
            out[i] = present[0]
        elif effective == "mean":
            out[i] = present.mean()
        else:
            out[i] = np.median(present)
    return TimedSeries(uniq, out, kind=s.kind, categories=s.categories)


def interval_analysis(
    s: TimedSeries, expected: float, tolerance: float = 0.0
) -> IntervalReport:
    """Classify consecutive gaps as normal when within ``tolerance`` of the
    expected interval. Undefined (pti None) for series shorter than 2."""
    ts = s.timestamps
    if ts.size < 2:
        return IntervalReport(expected, 0, 0, None, [])
    gaps = np.diff(ts)
    normal = np.abs(gaps - expected) <= tolerance
    irregular = np.flatnonzero(~normal)
    total = int(gaps.size)
    n_normal = int(normal.sum())
    return IntervalReport(expected, total, n_normal, n_normal / total, irregular.tolist())


def build_grid(start: float, end: float, interval: float) -> RegularGrid:
    if interval <= 0:
        raise ConfigError("grid interval must be > 0")
    if start > end:
        raise ValueError("grid start must not exceed end")
    return RegularGrid(float(start), float(end), float(interval))


def default_grid(s_or_ts, interval: float) -> RegularGrid:
    """Grid covering a series, endpoints rounded outward to the interval lattice."""
    ts = s_or_ts.timestamps if isinstance(s_or_ts, TimedSeries) else np.asarray(s_or_ts)
    if ts.size == 0:
        raise ValueError("cannot build a grid for an empty series")
    start = np.floor(ts.min() / interval + 1e-9) * interval
    end = np.ceil(ts.max() / interval - 1e-9) * interval
    return build_grid(start, end, interval)


def align_to_grid(
    s: TimedSeries, grid: RegularGrid, conflict_policy: str = "mean"
) -> tuple[TimedSeries, int]:
    """Re-index a series onto the grid, nearest slot wins (ties go to the
    earlier slot). Returns the aligned series and the out-of-range drop count.

    Slots fed by several inputs merge per ``conflict_policy`` over the
    non-missing values (categorical series always keep the first); unfed
    slots are missing.
    """
    if conflict_policy not in ("first", "mean", "median"):
        raise ValueError(f"unknown policy {conflict_policy!r}")
    slots = grid.slots
    ts = s.timestamps
    eps = 1e-9 * grid.interval
    in_range = (ts >= grid.start - grid.interval / 2 - eps) & (
        ts <= grid.end + grid.interval / 2 + eps
    )
    dropped = int((~in_range).sum())
    frac = (ts[in_range] - grid.start) / grid.interval
    idx = np.ceil(frac - 0.5).astype(np.int64)
    np.clip(idx, 0, slots - 1, out=idx)
    vals = s.values[in_range]

    present = ~np.isnan(vals)
    out = np.full(slots, np.nan)
    policy = "first" if s.kind == CATEGORICAL else conflict_policy
    if policy == "mean":
        counts = np.bincount(idx[present], minlength=slots)
        sums = np.bincount(idx[present], weights=vals[present], minlength=slots)
        fed = counts > 0
        out[fed] = sums[fed] / counts[fed]
    elif policy == "first":
        # reversed writes leave the first occurrence in place
        out[idx[present][::-1]] = vals[present][::-1]
    else:  # median
        counts = np.bincount(idx[present], minlength=slots)
        order = np.argsort(idx[present], kind="stable")
        sorted_vals = vals[present][order]
        boundaries = np.concatenate(([0], np.cumsum(counts)))
        for slot in np.flatnonzero(counts):
            out[slot] = np.median(sorted_vals[boundaries[slot] : boundaries[slot + 1]])
    return (
        TimedSeries(grid.timestamps(), out, kind=s.kind, categories=s.categories),
        dropped,
    )
