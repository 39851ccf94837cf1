"""Stage 2: per-feature format, form, missing, spike, statistical, seasonal,
autocorrelation and outlier analysis.

All statistics are computed over the non-missing values only, except the
autocorrelation, which runs on the series with gaps left in place so that
positional lags keep their meaning.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .types import (
    CATEGORICAL,
    CategoricalProfile,
    Dataset,
    DecompositionResult,
    DecompositionUnavailable,
    FormDistribution,
    MissingReport,
    MissingSpan,
    OutlierReport,
    SeasonalityResult,
    SpikeReport,
    TimedSeries,
    ValueProfile,
)


# ---------------------------------------------------------------------------
# formats and forms


def check_formats(ds: Dataset) -> tuple[dict[str, bool], float, list[str]]:
    """Per-feature format-correctness flags and their dataset-level share.

    A feature is correct when none of its non-missing cells violated the
    declared format. Features with no non-missing cells pass vacuously and
    are returned in the degenerate list.
    """
    flags: dict[str, bool] = {}
    degenerate: list[str] = []
    for schema, series in ds.features:
        name = schema.name
        flags[name] = len(ds.violations.get(name, ())) == 0
        stats = ds.cell_stats.get(name)
        all_missing = (
            stats.get("missing", 0) == stats.get("total", 0)
            if stats
            else series.present_values.size == 0
        )
        if all_missing:
            degenerate.append(name)
    pcdf = sum(flags.values()) / len(flags) if flags else 0.0
    return flags, pcdf, degenerate


def classify_forms(ds: Dataset) -> tuple[dict[str, str], FormDistribution]:
    """Assign each feature a data form and weight the shares by cell volume.

    The declared form is overridden to semi-structured when more than half of
    the non-missing cells hold nested key-value or markup payloads, and to
    unstructured when more than half are free text that fits neither the
    declared format nor a payload shape.
    """
    forms: dict[str, str] = {}
    volume = {"structured": 0, "semi-structured": 0, "unstructured": 0}
    total = 0
    for schema, series in ds.features:
        stats = ds.cell_stats.get(schema.name) or {
            "total": len(series),
            "missing": int(series.missing_mask.sum()),
        }
        cells = stats.get("total", 0)
        non_missing = cells - stats.get("missing", 0)
        form = schema.expected_form
        if non_missing > 0:
            if stats.get("markup", 0) / non_missing > 0.5:
                form = "semi-structured"
            elif stats.get("freetext", 0) / non_missing > 0.5:
                form = "unstructured"
        forms[schema.name] = form
        volume[form] += cells
        total += cells
    if total == 0:
        return forms, FormDistribution(1.0, 0.0, 0.0)
    return forms, FormDistribution(
        psd=volume["structured"] / total,
        pud=volume["unstructured"] / total,
        pssd=volume["semi-structured"] / total,
    )


# ---------------------------------------------------------------------------
# missing values


def analyze_missing(
    s: TimedSeries, thresholds: tuple[float, float], interval: float
) -> MissingReport:
    """Missing-value share plus maximal missing runs classified by duration.

    A run of ``L`` consecutive missing samples spans ``L * interval`` seconds;
    spans at most ``sms_max`` long are short-term, at most ``mms_max``
    medium-term, anything longer long-term.
    """
    sms_max, mms_max = thresholds
    mask = s.missing_mask
    n = mask.size
    missing_count = int(mask.sum())
    pmv = missing_count / n if n else 0.0
    spans: list[MissingSpan] = []
    if missing_count:
        padded = np.concatenate(([False], mask, [False]))
        edges = np.diff(padded.astype(np.int8))
        starts = np.flatnonzero(edges == 1)
        ends = np.flatnonzero(edges == -1)  # exclusive
        for i0, i1 in zip(starts, ends):
            length = int(i1 - i0)
            duration = length * interval
            if duration <= sms_max:
                label = "sms"
            elif duration <= mms_max:
                label = "mms"
            else:
                label = "lms"
            spans.append(
                MissingSpan(
                    start=float(s.timestamps[i0]),
                    end=float(s.timestamps[i1 - 1]),
                    length=length,
                    label=label,
                )
            )
    counts = {"sms": 0, "mms": 0, "lms": 0}
    for span in spans:
        counts[span.label] += 1
    return MissingReport(
        pmv=pmv,
        spans=spans,
        sms=counts["sms"],
        mms=counts["mms"],
        lms=counts["lms"],
        missing_count=missing_count,
        total_count=int(n),
    )


# ---------------------------------------------------------------------------
# spikes


def detect_spikes(
    s: TimedSeries, k: float, bounds: tuple[float, float] | None = None
) -> SpikeReport:
    """Flag isolated excursions in the gap-compressed series.

    An interior sample is a spike when it sits above (or below) both of its
    neighbours and both steps exceed ``k`` times the step dispersion. The
    dispersion for a candidate excludes the candidate's own two steps, so a
    large spike cannot mask itself; when nothing else is left the global
    dispersion is used. Interior samples outside ``bounds`` are spikes
    regardless of shape.
    """
    present = ~s.missing_mask
    x = s.values[present]
    t = s.timestamps[present]
    if x.size < 3:
        return SpikeReport(nas=0, events=[], insufficient=True)

    d = np.diff(x)
    m = d.size
    s1 = float(d.sum())
    s2 = float(np.dot(d, d))
    left = d[:-1]
    right = -d[1:]
    same_sign = left * right > 0.0

    # leave-out dispersion per interior candidate i (steps i-1 and i removed)
    loo_n = m - 2
    if loo_n > 0:
        s1_loo = s1 - d[:-1] - d[1:]
        s2_loo = s2 - d[:-1] ** 2 - d[1:] ** 2
        var = np.maximum(s2_loo / loo_n - (s1_loo / loo_n) ** 2, 0.0)
        sigma = np.sqrt(var)
    else:
        var_all = max(s2 / m - (s1 / m) ** 2, 0.0)
        sigma = np.full(m - 1, np.sqrt(var_all))

    shape_hits = same_sign & (np.abs(left) > k * sigma) & (np.abs(right) > k * sigma)
    hit_idx = set(np.flatnonzero(shape_hits) + 1)
    if bounds is not None:
        lo, hi = bounds
        interior = np.arange(1, x.size - 1)
        out_of_bounds = (x[interior] < lo) | (x[interior] > hi)
        hit_idx.update(interior[out_of_bounds].tolist())
    events = sorted((float(t[i]), float(x[i])) for i in hit_idx)
    return SpikeReport(nas=len(events), events=events)


# ---------------------------------------------------------------------------
# statistical factors


def continuous_profile(s: TimedSeries, quantile_method: str = "linear") -> ValueProfile:
    """Distribution factors over the non-missing values.

    Standard deviation and the higher moments are population (biased)
    central moments; skewness and excess kurtosis are undefined for a
    zero-variance series.
    """
    x = s.present_values
    if x.size == 0:
        return ValueProfile(0, None, None, None, None, None, None, None, None, None)
    q1, med, q3 = np.quantile(x, [0.25, 0.5, 0.75], method=quantile_method)
    mean = float(x.mean())
    dev = x - mean
    m2 = float(np.mean(dev**2))
    std = float(np.sqrt(m2))
    if m2 > 0.0:
        skew = float(np.mean(dev**3) / m2**1.5)
        exkurt = float(np.mean(dev**4) / m2**2 - 3.0)
    else:
        skew = None
        exkurt = None
    return ValueProfile(
        cardinality=int(np.unique(x).size),
        minimum=float(x.min()),
        q1=float(q1),
        mean=mean,
        median=float(med),
        q3=float(q3),
        maximum=float(x.max()),
        std=std,
        skewness=skew,
        excess_kurtosis=exkurt,
    )


def categorical_profile(s: TimedSeries) -> CategoricalProfile:
    """Mode statistics over the non-missing tokens; ties break toward the
    token seen first."""
    codes = s.present_values
    if codes.size == 0:
        return CategoricalProfile(0, None, None, None)
    counts = np.bincount(codes.astype(np.int64))
    mode_code = int(np.argmax(counts))  # argmax takes the smallest = first seen
    token = s.categories[mode_code] if mode_code < len(s.categories) else str(mode_code)
    return CategoricalProfile(
        cardinality=int((counts > 0).sum()),
        mode=token,
        mode_freq=int(counts[mode_code]),
        mode_pct=float(counts[mode_code] / codes.size),
    )


# ---------------------------------------------------------------------------
# seasonal decomposition


def _centered_trend(x: np.ndarray, period: int) -> np.ndarray:
    """Centered moving average; even periods use the symmetric double window.

    Windowed sums come from cumulative sums (O(n)); any window touching a
    missing sample yields a missing trend point.
    """
    n = x.size
    width = period + (0 if period % 2 else 1)
    trend = np.full(n, np.nan)
    if n < width:
        return trend
    gap = np.isnan(x)
    filled = np.where(gap, 0.0, x)
    csum = np.concatenate(([0.0], np.cumsum(filled)))
    cgap = np.concatenate(([0], np.cumsum(gap.astype(np.int64))))
    starts = np.arange(n - width + 1)
    sums = csum[starts + width] - csum[starts]
    if period % 2 == 0:
        sums -= 0.5 * (filled[starts] + filled[starts + width - 1])
    poisoned = (cgap[starts + width] - cgap[starts]) > 0
    vals = sums / period
    vals[poisoned] = np.nan
    trend[starts + (width - 1) // 2] = vals
    return trend


def _longest_present_run(x: np.ndarray) -> int:
    mask = ~np.isnan(x)
    if not mask.any():
        return 0
    padded = np.concatenate(([False], mask, [False])).astype(np.int8)
    edges = np.diff(padded)
    return int((np.flatnonzero(edges == -1) - np.flatnonzero(edges == 1)).max())


def decompose(s: TimedSeries, period: int, model: str = "additive") -> DecompositionResult:
    """Classical trend / seasonal / remainder split by positional period.

    The trend is a centered moving average (the symmetric double window for
    even periods); the seasonal component is the per-phase mean of the
    detrended series, recentered so it sums to nothing (additive) or averages
    to one (multiplicative). Components re-sum to the input wherever the
    trend is defined.
    """
    if model not in ("additive", "multiplicative"):
        raise ValueError(f"unknown model {model!r}")
    if period < 2:
        raise ValueError("period must be >= 2")
    x = s.values
    if _longest_present_run(x) < 2 * period:
        raise DecompositionUnavailable(
            f"need {2 * period} contiguous samples for period {period}"
        )
    trend = _centered_trend(x, period)
    if model == "additive":
        detrended = x - trend
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            detrended = np.where(trend != 0.0, x / trend, np.nan)

    phases = np.arange(x.size) % period
    ok = ~np.isnan(detrended)
    phase_counts = np.bincount(phases[ok], minlength=period)
    phase_sums = np.bincount(phases[ok], weights=detrended[ok], minlength=period)
    with np.errstate(invalid="ignore"):
        phase_means = np.where(phase_counts > 0, phase_sums / np.maximum(phase_counts, 1), np.nan)
    if model == "additive":
        phase_means = phase_means - np.nanmean(phase_means)
        seasonal = phase_means[phases]
        residual = detrended - seasonal
    else:
        center = np.nanmean(phase_means)
        if center != 0.0:
            phase_means = phase_means / center
        seasonal = phase_means[phases]
        with np.errstate(divide="ignore", invalid="ignore"):
            residual = np.where(seasonal != 0.0, detrended / seasonal, np.nan)
    return DecompositionResult(trend, seasonal, residual, model, period)


def detect_seasonality(
    s: TimedSeries,
    periods: tuple[int, ...],
    tolerance: float,
    model: str = "additive",
) -> SeasonalityResult:
    """Seasonal flag: some candidate period shows a repeating component whose
    swing both exceeds ``tolerance`` times the series dispersion and clears
    the noise floor expected from phase-averaging alone (x3 margin)."""
    x = s.present_values
    if x.size == 0:
        return SeasonalityResult(False, low_confidence=True)
    std = float(x.std())
    if std == 0.0:
        return SeasonalityResult(False)
    attempted = False
    for period in periods:
        try:
            result = decompose(s, period, model=model)
        except DecompositionUnavailable:
            continue
        attempted = True
        detrended = (
            s.values - result.trend
            if model == "additive"
            else np.where(result.trend != 0.0, s.values / result.trend, np.nan)
        )
        ok = ~np.isnan(detrended)
        n_det = int(ok.sum())
        if n_det == 0:
            continue
        phase_vals = result.seasonal[:period]
        phase_vals = phase_vals[~np.isnan(phase_vals)]
        if phase_vals.size == 0:
            continue
        amplitude = float(phase_vals.max() - phase_vals.min())
        var_between = float(np.mean((phase_vals - phase_vals.mean()) ** 2))
        noise_floor = 3.0 * float(np.nanvar(detrended)) * period / n_det
        if amplitude > tolerance * std and var_between > noise_floor:
            return SeasonalityResult(True, period=period)
    return SeasonalityResult(False, low_confidence=not attempted)


# ---------------------------------------------------------------------------
# autocorrelation and outliers


def autocorrelation(s: TimedSeries, max_lag: int) -> np.ndarray | None:
    """Lagged self-correlation on the gap-preserved series; None when the
    present values are empty or constant."""
    acf = kernels.acf_gaps(s.values, max_lag)
    if np.isnan(acf[0]):
        return None
    return acf


def detect_outliers(
    s: TimedSeries,
    c: float = 1.5,
    bounds: tuple[float, float] | None = None,
    quantile_method: str = "linear",
) -> OutlierReport:
    """Quartile-fence outliers with an optional physical-bounds override.

    Values strictly outside [q1 - c*iqr, q3 + c*iqr] are outliers. When
    physical ``bounds`` are configured the acceptance window widens to their
    union, so readings inside the physical range are never flagged. Undefined
    for fewer than 4
    non-missing values.
    """
    present_mask = ~s.missing_mask
    x = s.values[present_mask]
    if x.size < 4:
        return OutlierReport.undefined()
    q1, q3 = np.quantile(x, [0.25, 0.75], method=quantile_method)
    iqr = q3 - q1
    lower = q1 - c * iqr
    upper = q3 + c * iqr
    accept_lo, accept_hi = lower, upper
    if bounds is not None:
        accept_lo = min(lower, bounds[0])
        accept_hi = max(upper, bounds[1])
    flagged = (x < accept_lo) | (x > accept_hi)
    indices = np.flatnonzero(present_mask)[flagged]
    return OutlierReport(
        q1=float(q1),
        q3=float(q3),
        iqr=float(iqr),
        lower=float(lower),
        upper=float(upper),
        indices=indices.tolist(),
        rate=float(flagged.sum() / x.size),
    )
