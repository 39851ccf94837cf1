"""Domain types shared across the profiler.

Naming follows the indicator vocabulary used throughout sensor data-quality
work: PTI (share of normal time intervals), PMV (share of missing values),
DTS/DTD (duplicate timestamps with same/different values), SMS/MMS/LMS
(short/medium/long missing spans), PSD/PUD/PSSD (structured, unstructured,
semi-structured data shares), NAS (abnormal spike count), CDF/PCDF (correct
data format per feature / share of features).

Timestamps are epoch seconds (float64); missing values are NaN. Categorical
series store integer codes (assigned in first-appearance order) as floats so
every kernel sees one dtype.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"

KINDS = (CONTINUOUS, CATEGORICAL)
FORMATS = ("integer", "float", "boolean", "timestamp", "category-text")
FORMS = ("structured", "semi-structured", "unstructured")

DEFAULT_MISSING_MARKERS = ("", "na", "nan", "null")


class SchemaError(ValueError):
    """Fatal problem with the declared schema or the input layout."""


class ConfigError(ValueError):
    """Invalid profiler configuration."""


class FormatViolationError(ValueError):
    """A cell does not conform to its declared storage format."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


class DecompositionUnavailable(ValueError):
    """Series too short or too gappy for a seasonal split."""


@dataclass(frozen=True)
class FeatureSchema:
    name: str
    kind: str = CONTINUOUS
    expected_format: str = "float"
    expected_form: str = "structured"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown kind {self.kind!r} for feature {self.name!r}")
        if self.expected_format not in FORMATS:
            raise SchemaError(
                f"unknown expected_format {self.expected_format!r} for feature {self.name!r}"
            )
        if self.expected_form not in FORMS:
            raise SchemaError(
                f"unknown expected_form {self.expected_form!r} for feature {self.name!r}"
            )
        if self.kind == CONTINUOUS and self.expected_format not in ("integer", "float"):
            raise SchemaError(
                f"continuous feature {self.name!r} requires integer or float format, "
                f"got {self.expected_format!r}"
            )


@dataclass(frozen=True)
class ProfilerConfig:
    """Tuning knobs for one profiling run. Durations are in seconds."""

    expected_interval: float
    interval_tolerance: float = 0.0
    sms_max: float = 1800.0
    mms_max: float = 21600.0
    outlier_coefficient: float = 1.5
    quantile_method: str = "linear"
    spike_k: float = 6.0
    spike_bounds: dict[str, tuple[float, float]] | None = None
    correlation_threshold: float = 0.7
    max_cross_delay: float = 300.0
    max_acf_lag: int = 60
    seasonal_periods: tuple[int, ...] = (12, 24, 96)
    seasonal_tolerance: float = 0.05
    veracity_weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    variability_weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    # input plumbing
    timestamp_column: str = "timestamp"
    timestamp_format: str = "iso8601"
    delimiter: str = ","
    # extra missing markers on top of DEFAULT_MISSING_MARKERS (case-insensitive)
    missing_markers: tuple[str, ...] = ()
    dataset_name: str = "dataset"
    # pipeline behaviour
    duplicate_policy: str = "median"
    align_policy: str = "mean"
    correlation_use_abs: bool = False
    grid_start: float | None = None
    grid_end: float | None = None
    # recommendation thresholds (None disables the rule)
    velocity_requirement: float | None = None
    volume_threshold: float | None = None

    def __post_init__(self):
        if self.expected_interval <= 0:
            raise ConfigError("expected_interval must be > 0")
        if not (0 < self.sms_max < self.mms_max):
            raise ConfigError("need 0 < sms_max < mms_max")
        if abs(sum(self.veracity_weights) - 1.0) > 1e-12:
            raise ConfigError("veracity_weights must sum to 1")
        if abs(sum(self.variability_weights) - 1.0) > 1e-12:
            raise ConfigError("variability_weights must sum to 1")
        if len(self.veracity_weights) != 4 or len(self.variability_weights) != 3:
            raise ConfigError("weight vectors must have 4 and 3 entries")
        if self.quantile_method not in ("linear",):
            raise ConfigError(f"unsupported quantile_method {self.quantile_method!r}")
        if self.duplicate_policy not in ("first", "mean", "median"):
            raise ConfigError(f"unknown duplicate_policy {self.duplicate_policy!r}")
        if self.align_policy not in ("first", "mean", "median"):
            raise ConfigError(f"unknown align_policy {self.align_policy!r}")
        if self.max_acf_lag < 1:
            raise ConfigError("max_acf_lag must be >= 1")
        if self.interval_tolerance < 0:
            raise ConfigError("interval_tolerance must be >= 0")
        if any(p < 2 for p in self.seasonal_periods):
            raise ConfigError("seasonal periods must be >= 2")


@dataclass
class TimedSeries:
    """One feature's (timestamp, value) sequence.

    ``values`` is float64 with NaN marking missing samples. For categorical
    features the floats are category codes and ``categories`` maps
    code -> token.
    """

    timestamps: np.ndarray
    values: np.ndarray
    kind: str = CONTINUOUS
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.timestamps.shape != self.values.shape:
            raise ValueError("timestamps and values must have equal length")
        if self.timestamps.size > 1 and np.any(np.diff(self.timestamps) < 0):
            raise ValueError("timestamps must be non-decreasing")

    def __len__(self) -> int:
        return int(self.timestamps.size)

    @property
    def missing_mask(self) -> np.ndarray:
        return np.isnan(self.values)

    @property
    def present_values(self) -> np.ndarray:
        return self.values[~np.isnan(self.values)]


@dataclass
class Dataset:
    name: str
    features: list[tuple[FeatureSchema, TimedSeries]]
    ni: int
    n_rows: int
    # per-feature parse statistics collected at load time
    violations: dict[str, list[tuple[int, str, str]]] = field(default_factory=dict)
    cell_stats: dict[str, dict[str, int]] = field(default_factory=dict)
    load_log: list[str] = field(default_factory=list)

    @property
    def nf(self) -> int:
        return len(self.features)

    def series(self, name: str) -> TimedSeries:
        for schema, ts in self.features:
            if schema.name == name:
                return ts
        raise KeyError(name)

    def schema(self, name: str) -> FeatureSchema:
        for schema, _ in self.features:
            if schema.name == name:
                return schema
        raise KeyError(name)

    @property
    def feature_names(self) -> list[str]:
        return [schema.name for schema, _ in self.features]


# --------------------------------------------------------------------------
# per-analysis result records


@dataclass
class DuplicateGroup:
    timestamp: float
    rows: list[int]
    same_value: bool


@dataclass
class DuplicateReport:
    dts: int
    dtd: int
    groups: list[DuplicateGroup]


@dataclass
class IntervalReport:
    expected: float
    total_intervals: int
    normal_intervals: int
    pti: float | None
    irregular_positions: list[int]

    @property
    def defined(self) -> bool:
        return self.pti is not None


@dataclass(frozen=True)
class RegularGrid:
    start: float
    end: float
    interval: float

    @property
    def slots(self) -> int:
        return int(np.floor((self.end - self.start) / self.interval + 1e-9)) + 1

    def timestamps(self) -> np.ndarray:
        return self.start + self.interval * np.arange(self.slots, dtype=np.float64)


@dataclass
class FormDistribution:
    psd: float
    pud: float
    pssd: float

    def __post_init__(self):
        total = self.psd + self.pud + self.pssd
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"form shares must sum to 1, got {total}")


@dataclass
class MissingSpan:
    start: float
    end: float
    length: int
    label: str  # sms | mms | lms


@dataclass
class MissingReport:
    pmv: float
    spans: list[MissingSpan]
    sms: int
    mms: int
    lms: int
    missing_count: int
    total_count: int


@dataclass
class SpikeReport:
    nas: int
    events: list[tuple[float, float]]
    insufficient: bool = False


@dataclass
class ValueProfile:
    cardinality: int
    minimum: float | None
    q1: float | None
    mean: float | None
    median: float | None
    q3: float | None
    maximum: float | None
    std: float | None
    skewness: float | None
    excess_kurtosis: float | None


@dataclass
class CategoricalProfile:
    cardinality: int
    mode: str | None
    mode_freq: int | None
    mode_pct: float | None


@dataclass
class OutlierReport:
    q1: float
    q3: float
    iqr: float
    lower: float
    upper: float
    indices: list[int]
    rate: float
    defined: bool = True

    @classmethod
    def undefined(cls) -> "OutlierReport":
        nan = float("nan")
        return cls(nan, nan, nan, nan, nan, [], nan, defined=False)


@dataclass
class DecompositionResult:
    trend: np.ndarray
    seasonal: np.ndarray
    residual: np.ndarray
    model: str
    period: int


@dataclass
class SeasonalityResult:
    seasonal: bool
    period: int | None = None
    low_confidence: bool = False


@dataclass
class CrossCorrelationResult:
    feature_a: str
    feature_b: str
    best_value: float | None
    best_lag: int | None

    @property
    def defined(self) -> bool:
        return self.best_value is not None


@dataclass
class CorrelationMatrix:
    features: list[str]
    entries: dict[tuple[str, str], CrossCorrelationResult]

    def get(self, a: str, b: str) -> CrossCorrelationResult:
        """Entry for an unordered pair; the (b, a) view negates the lag."""
        if (a, b) in self.entries:
            return self.entries[(a, b)]
        res = self.entries[(b, a)]
        lag = None if res.best_lag is None else -res.best_lag
        return CrossCorrelationResult(a, b, res.best_value, lag)

    def pair_values(self) -> list[float | None]:
        return [r.best_value for r in self.entries.values()]


@dataclass
class SixVsScores:
    vol: int
    varie: float  # +inf when everything is structured
    vel: float
    ver: float | None
    val: float | None
    varia: float | None
    components: dict[str, float | None] = field(default_factory=dict)


@dataclass
class Recommendation:
    dimension: str
    rule_id: str
    severity: str  # info | warn | critical
    trigger: str
    action: str
    evidence: dict[str, object] = field(default_factory=dict)
