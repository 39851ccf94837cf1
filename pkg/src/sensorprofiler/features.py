"""Stage 3: cross-feature analysis on the grid-aligned dataset."""

from __future__ import annotations

import numpy as np

from . import kernels
from .types import (
    CONTINUOUS,
    CorrelationMatrix,
    CrossCorrelationResult,
    TimedSeries,
)


def cross_correlation(
    x: TimedSeries,
    y: TimedSeries,
    max_delay: float,
    interval: float,
    names: tuple[str, str] = ("x", "y"),
    use_abs: bool = False,
) -> CrossCorrelationResult:
    """Best delayed correlation between two series on the same grid.

    Scans slot delays up to ``max_delay`` seconds in both directions and
    keeps the largest (signed by default) correlation; delay ties resolve to
    the smallest magnitude, negative first. Undefined when no delay offers at
    least 3 overlapping pairs with variation on both sides.
    """
    if x.values.size != y.values.size:
        raise ValueError("series must share one grid")
    max_k = int(np.floor(max_delay / interval + 1e-9))
    value, lag, defined = kernels.xcorr_scan(x.values, y.values, max_k, use_abs=use_abs)
    if not defined:
        return CrossCorrelationResult(names[0], names[1], None, None)
    return CrossCorrelationResult(names[0], names[1], value, lag)


def correlation_matrix(
    aligned: list[tuple[str, TimedSeries]],
    max_delay: float,
    interval: float,
    use_abs: bool = False,
) -> CorrelationMatrix:
    """All unordered pairs of the given (numeric) features, in input order."""
    names = [name for name, _ in aligned]
    entries: dict[tuple[str, str], CrossCorrelationResult] = {}
    for i in range(len(aligned)):
        for j in range(i + 1, len(aligned)):
            a, sa = aligned[i]
            b, sb = aligned[j]
            entries[(a, b)] = cross_correlation(
                sa, sb, max_delay, interval, names=(a, b), use_abs=use_abs
            )
    return CorrelationMatrix(features=names, entries=entries)


def numeric_features(features: list[tuple]) -> list[tuple[str, TimedSeries]]:
    """The continuous-kind subset of a dataset's features, schema order."""
    return [(schema.name, series) for schema, series in features if schema.kind == CONTINUOUS]


def recompute_pmv(aligned: list[tuple[str, TimedSeries]]) -> dict[str, float]:
    """Missing share per feature on the grid-aligned series."""
    out = {}
    for name, series in aligned:
        n = series.values.size
        out[name] = float(np.isnan(series.values).sum() / n) if n else 0.0
    return out
