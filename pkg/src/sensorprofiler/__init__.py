"""sensorprofiler: data-characteristic profiling for timestamped sensor data.

Loads delimited exports, runs the three-stage understanding pipeline
(timestamps, values, cross-feature), aggregates the six dataset-level
scores, and emits machine- or human-readable reports with preprocessing
recommendations.
"""

__version__ = "0.1.0"

from .ingestion import (
    load_config_document,
    load_dataset,
    load_schema_document,
    parse_timestamp,
    render_timestamp,
    validate_schema,
)
from .pipeline import DatasetProfile, FeatureReport, run_pipeline
from .recommend import recommend
from .report import emit_report, load_report, parse_report, profile_to_document, verify
from .types import (
    ConfigError,
    Dataset,
    FeatureSchema,
    ProfilerConfig,
    SchemaError,
    TimedSeries,
)

__all__ = [
    "ConfigError",
    "Dataset",
    "DatasetProfile",
    "FeatureReport",
    "FeatureSchema",
    "ProfilerConfig",
    "SchemaError",
    "TimedSeries",
    "emit_report",
    "load_config_document",
    "load_dataset",
    "load_report",
    "load_schema_document",
    "parse_report",
    "parse_timestamp",
    "profile_to_document",
    "recommend",
    "render_timestamp",
    "run_pipeline",
    "validate_schema",
    "verify",
]
