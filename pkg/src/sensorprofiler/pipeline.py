"""Three-stage orchestration: timestamps, values, cross-feature, then scores.

Per feature the order is fixed: duplicate detection/resolution, interval
regularity, format check, form classification, missing analysis on the raw
series, statistics/outliers/spikes on the gap-compressed values, lagged
self-correlation on the gap-preserved series, grid alignment, missing
analysis again on the aligned series, then the pairwise correlation scan and
the six scores. Degenerate features are flagged, never fatal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import features as feature_ops
from . import scoring, timegrid, values
from .types import (
    CATEGORICAL,
    CONTINUOUS,
    CategoricalProfile,
    CorrelationMatrix,
    Dataset,
    DuplicateReport,
    FeatureSchema,
    FormDistribution,
    IntervalReport,
    MissingReport,
    OutlierReport,
    ProfilerConfig,
    RegularGrid,
    SeasonalityResult,
    SixVsScores,
    SpikeReport,
    TimedSeries,
    ValueProfile,
)


@dataclass
class FeatureReport:
    name: str
    kind: str
    cdf: bool
    violation_count: int
    form: str
    duplicates: DuplicateReport
    intervals: IntervalReport
    missing_old: MissingReport
    missing_new: MissingReport
    spikes: SpikeReport | None
    stats: ValueProfile | CategoricalProfile
    outliers: OutlierReport | None
    acf: np.ndarray | None
    seasonality: SeasonalityResult
    factors: dict[str, bool]
    alignment_drops: int


@dataclass
class DatasetProfile:
    name: str
    nf: int
    ni: int
    n_rows: int
    config: ProfilerConfig
    schemas: list[FeatureSchema]
    features: list[FeatureReport]
    forms: dict[str, str]
    form_distribution: FormDistribution
    pcdf: float
    grid: RegularGrid
    matrix: CorrelationMatrix
    scores: SixVsScores
    log: list[str] = field(default_factory=list)

    def feature(self, name: str) -> FeatureReport:
        for fr in self.features:
            if fr.name == name:
                return fr
        raise KeyError(name)


def _mean(items: list[float]) -> float | None:
    return sum(items) / len(items) if items else None


def run_pipeline(ds: Dataset, config: ProfilerConfig) -> DatasetProfile:
    """Profile one loaded dataset end to end."""
    log: list[str] = list(ds.load_log)
    cdf_flags, pcdf, degenerate = values.check_formats(ds)
    for name in degenerate:
        log.append(f"feature {name}: no non-missing cells, format check is vacuous")
    forms, form_distribution = values.classify_forms(ds)

    bounds_table = config.spike_bounds or {}
    resolved: list[tuple[FeatureSchema, TimedSeries]] = []
    duplicates: dict[str, DuplicateReport] = {}
    intervals: dict[str, IntervalReport] = {}

    for schema, series in ds.features:
        dup = detect_and_log_duplicates(schema.name, series, config, log)
        duplicates[schema.name] = dup
        res = timegrid.resolve_duplicates(series, config.duplicate_policy)
        resolved.append((schema, res))
        rep = timegrid.interval_analysis(
            res, config.expected_interval, config.interval_tolerance
        )
        if not rep.defined:
            log.append(f"feature {schema.name}: fewer than 2 rows, interval share undefined")
        intervals[schema.name] = rep

    grid = _make_grid(resolved, config)

    reports: list[FeatureReport] = []
    aligned_numeric: list[tuple[str, TimedSeries]] = []
    for schema, res in resolved:
        name = schema.name
        missing_old = values.analyze_missing(
            res, (config.sms_max, config.mms_max), config.expected_interval
        )
        if schema.kind == CONTINUOUS:
            spikes = values.detect_spikes(res, config.spike_k, bounds_table.get(name))
            if spikes.insufficient:
                log.append(f"feature {name}: under 3 non-missing samples, spike scan skipped")
            stats = values.continuous_profile(res, config.quantile_method)
            outliers = values.detect_outliers(
                res,
                config.outlier_coefficient,
                bounds=bounds_table.get(name),
                quantile_method=config.quantile_method,
            )
            if not outliers.defined:
                log.append(f"feature {name}: under 4 non-missing samples, fences undefined")
        else:
            spikes = None
            stats = values.categorical_profile(res)
            outliers = None
        seasonality = values.detect_seasonality(
            res, config.seasonal_periods, config.seasonal_tolerance
        )
        if seasonality.low_confidence:
            log.append(f"feature {name}: seasonality flag is low-confidence")
        acf = values.autocorrelation(res, config.max_acf_lag)
        if acf is None:
            log.append(f"feature {name}: constant or empty series, self-correlation undefined")

        aligned, drops = timegrid.align_to_grid(res, grid, config.align_policy)
        if drops:
            log.append(f"feature {name}: {drops} samples outside the grid range dropped")
        missing_new = values.analyze_missing(
            aligned, (config.sms_max, config.mms_max), config.expected_interval
        )
        if schema.kind == CONTINUOUS:
            aligned_numeric.append((name, aligned))

        present = res.present_values.size
        factors = scoring.factor_validity_for(
            schema.kind,
            stats,
            seasonality_defined=present > 0,
            acf_defined=acf is not None,
        )
        reports.append(
            FeatureReport(
                name=name,
                kind=schema.kind,
                cdf=cdf_flags[name],
                violation_count=len(ds.violations.get(name, ())),
                form=forms[name],
                duplicates=duplicates[name],
                intervals=intervals[name],
                missing_old=missing_old,
                missing_new=missing_new,
                spikes=spikes,
                stats=stats,
                outliers=outliers,
                acf=acf,
                seasonality=seasonality,
                factors=factors,
                alignment_drops=drops,
            )
        )

    matrix = feature_ops.correlation_matrix(
        aligned_numeric,
        config.max_cross_delay,
        config.expected_interval,
        use_abs=config.correlation_use_abs,
    )
    for pair, res in matrix.entries.items():
        if not res.defined:
            log.append(f"pair {pair[0]}/{pair[1]}: correlation undefined")

    scores = compute_scores(ds, config, reports, form_distribution, pcdf, matrix)
    return DatasetProfile(
        name=ds.name,
        nf=ds.nf,
        ni=ds.ni,
        n_rows=ds.n_rows,
        config=config,
        schemas=[schema for schema, _ in ds.features],
        features=reports,
        forms=forms,
        form_distribution=form_distribution,
        pcdf=pcdf,
        grid=grid,
        matrix=matrix,
        scores=scores,
        log=log,
    )


def detect_and_log_duplicates(
    name: str, series: TimedSeries, config: ProfilerConfig, log: list[str]
) -> DuplicateReport:
    dup = timegrid.detect_duplicates(series)
    for group in dup.groups:
        how = "kept shared value" if group.same_value else f"merged by {config.duplicate_policy}"
        log.append(
            f"feature {name}: {len(group.rows)} rows at t={group.timestamp:g} {how}"
        )
    return dup


def _make_grid(
    resolved: list[tuple[FeatureSchema, TimedSeries]], config: ProfilerConfig
) -> RegularGrid:
    if config.grid_start is not None and config.grid_end is not None:
        return timegrid.build_grid(config.grid_start, config.grid_end, config.expected_interval)
    lo = min(float(res.timestamps[0]) for _, res in resolved if len(res))
    hi = max(float(res.timestamps[-1]) for _, res in resolved if len(res))
    if config.grid_start is not None:
        lo = config.grid_start
    if config.grid_end is not None:
        hi = config.grid_end
    start = np.floor(lo / config.expected_interval + 1e-9) * config.expected_interval
    end = np.ceil(hi / config.expected_interval - 1e-9) * config.expected_interval
    return timegrid.build_grid(start, end, config.expected_interval)


def compute_scores(
    ds: Dataset,
    config: ProfilerConfig,
    reports: list[FeatureReport],
    form_distribution: FormDistribution,
    pcdf: float,
    matrix: CorrelationMatrix,
) -> SixVsScores:
    vol = scoring.score_volume(ds.nf, ds.ni)
    varie = scoring.score_variety(form_distribution)
    vel = scoring.score_velocity(config)

    nas_values = [float(fr.spikes.nas) for fr in reports if fr.spikes is not None]
    pti_values = [fr.intervals.pti for fr in reports if fr.intervals.pti is not None]
    pmv_values = [fr.missing_old.pmv for fr in reports]
    mean_nas = _mean(nas_values)
    mean_pti = _mean(pti_values)
    mean_pmv = _mean(pmv_values)
    if mean_pti is None or mean_pmv is None:
        ver = None
    else:
        ver = scoring.score_veracity(
            pcdf, mean_nas or 0.0, ds.ni, mean_pti, mean_pmv, config.veracity_weights
        )

    val, attempted, invalid = scoring.score_value({fr.name: fr.factors for fr in reports})

    stds = [
        fr.stats.std if isinstance(fr.stats, ValueProfile) else None for fr in reports
    ]
    rates = [
        fr.outliers.rate if fr.outliers is not None and fr.outliers.defined else None
        for fr in reports
    ]
    if any(v is not None for v in stds):
        varia, nstd, po, vc = scoring.score_variability(
            stds, rates, matrix, config.correlation_threshold, config.variability_weights
        )
    else:
        varia, nstd, po, vc = None, None, None, None

    return SixVsScores(
        vol=vol,
        varie=varie,
        vel=vel,
        ver=ver,
        val=val,
        varia=varia,
        components={
            "pcdf": pcdf,
            "mean_nas": mean_nas,
            "mean_pti": mean_pti,
            "mean_pmv_old": mean_pmv,
            "val_attempted": attempted,
            "val_invalid": invalid,
            "nstd": nstd,
            "po": po,
            "vc": vc,
        },
    )
