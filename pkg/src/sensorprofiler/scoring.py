"""Aggregation of per-feature indicators into the six dataset-level scores."""

from __future__ import annotations

import math

import numpy as np

from .types import CATEGORICAL, CorrelationMatrix, FormDistribution, ProfilerConfig

CONTINUOUS_FACTORS = (
    "cardinality",
    "min",
    "q1",
    "mean",
    "median",
    "q3",
    "max",
    "std",
    "skewness",
    "kurtosis",
    "seasonality",
    "autocorrelation",
)
CATEGORICAL_FACTORS = (
    "cardinality",
    "mode",
    "mode_freq",
    "mode_pct",
    "seasonality",
    "autocorrelation",
)


def score_volume(nf: int, ni: int) -> int:
    """Feature count times instance count, exact integer arithmetic."""
    if nf < 0 or ni < 0:
        raise ValueError("counts must be non-negative")
    return int(nf) * int(ni)


def score_variety(fd: FormDistribution) -> float:
    """Structured share over the rest; +inf when everything is structured."""
    rest = fd.pud + fd.pssd
    if rest == 0.0:
        return math.inf
    return fd.psd / rest


def score_velocity(config: ProfilerConfig) -> float:
    """The configured data-production interval, seconds."""
    return float(config.expected_interval)


def score_veracity(
    pcdf: float,
    mean_nas: float,
    ni: int,
    mean_pti: float,
    mean_pmv_raw: float,
    weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25),
) -> float | None:
    """Weighted blend of format, spike, interval and missing-value defects.

    Spike and missing shares are feature averages; the missing share comes
    from the raw (pre-alignment) series. 0 is perfect data; undefined for
    datasets of 2 rows or fewer.
    """
    if ni <= 2:
        return None
    w1, w2, w3, w4 = weights
    return (
        (1.0 - pcdf) * w1
        + (mean_nas / (ni - 2)) * w2
        + (1.0 - mean_pti) * w3
        + mean_pmv_raw * w4
    )


def score_value(
    factor_validity: dict[str, dict[str, bool]]
) -> tuple[float | None, int, int]:
    """Share of indicator slots that came out undefined.

    ``factor_validity`` maps feature -> factor -> defined?. Each feature
    contributes its factor-set size plus one slot (the correlation curve is
    tallied both as a table factor and as its own attempt), while an
    undefined factor is counted once. Returns (share, attempted, invalid).
    """
    attempted = 0
    invalid = 0
    for factors in factor_validity.values():
        attempted += len(factors) + 1
        invalid += sum(1 for defined in factors.values() if not defined)
    if attempted == 0:
        return None, 0, 0
    return invalid / attempted, attempted, invalid


def factor_validity_for(
    kind: str,
    profile,
    seasonality_defined: bool,
    acf_defined: bool,
) -> dict[str, bool]:
    """Defined/undefined map for one feature's statistical factor set."""
    if kind == CATEGORICAL:
        return {
            "cardinality": profile.cardinality > 0,
            "mode": profile.mode is not None,
            "mode_freq": profile.mode_freq is not None,
            "mode_pct": profile.mode_pct is not None,
            "seasonality": seasonality_defined,
            "autocorrelation": acf_defined,
        }
    return {
        "cardinality": profile.cardinality > 0,
        "min": profile.minimum is not None,
        "q1": profile.q1 is not None,
        "mean": profile.mean is not None,
        "median": profile.median is not None,
        "q3": profile.q3 is not None,
        "max": profile.maximum is not None,
        "std": profile.std is not None,
        "skewness": profile.skewness is not None,
        "kurtosis": profile.excess_kurtosis is not None,
        "seasonality": seasonality_defined,
        "autocorrelation": acf_defined,
    }


def score_variability(
    stds: list[float | None],
    rates: list[float | None],
    matrix: CorrelationMatrix | list[float | None],
    threshold: float = 0.7,
    weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3),
) -> tuple[float | None, float, float | None, float | None]:
    """Dispersion, outlier and correlation blend: (score, nstd, po, vc).

    nstd: mean of the min-max scaled feature dispersions (all-equal scales
    to 0). po: mean outlier rate over features with a defined report. vc:
    share of defined correlation pairs above the threshold. The blended
    score is None whenever po or vc is undefined.
    """
    defined_stds = np.asarray([v for v in stds if v is not None], dtype=np.float64)
    if defined_stds.size == 0:
        raise ValueError("need at least one feature with a defined dispersion")
    span = defined_stds.max() - defined_stds.min()
    if span == 0.0:
        nstd = 0.0
    else:
        nstd = float(np.mean((defined_stds - defined_stds.min()) / span))

    defined_rates = [v for v in rates if v is not None and not math.isnan(v)]
    po = float(np.mean(defined_rates)) if defined_rates else None

    values = matrix.pair_values() if isinstance(matrix, CorrelationMatrix) else list(matrix)
    defined_pairs = [v for v in values if v is not None]
    vc = (
        sum(1 for v in defined_pairs if v > threshold) / len(defined_pairs)
        if defined_pairs
        else None
    )

    if po is None or vc is None:
        return None, nstd, po, vc
    w1, w2, w3 = weights
    varia = nstd * w1 + po * w2 + (1.0 - vc) * w3
    return varia, nstd, po, vc
