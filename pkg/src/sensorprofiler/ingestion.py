"""Loading of delimited sensor exports plus the schema/config JSON documents.

The loader is columnar: the file is read once with the pandas C parser
(plain float columns on the native numeric path, everything else as strings),
then each column is converted with vectorized operations. Cells that do not
conform to the declared storage format become missing markers and are
recorded as violations carrying the 0-based data-row index of the source
file. Rows whose timestamp cell cannot be parsed are dropped and logged.
"""

from __future__ import annotations

import json
import re
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Iterable

import numpy as np
import pandas as pd

from .types import (
    CATEGORICAL,
    CONTINUOUS,
    DEFAULT_MISSING_MARKERS,
    ConfigError,
    Dataset,
    FeatureSchema,
    FormatViolationError,
    ProfilerConfig,
    SchemaError,
    TimedSeries,
)

_INT_RE = re.compile(r"\s*[+-]?\d+\s*")
_XML_RE = re.compile(r"<\w[^>]*>")
_BOOL_TOKENS = {"true": 1.0, "yes": 1.0, "1": 1.0, "false": 0.0, "no": 0.0, "0": 0.0}


def _marker_variants(markers: set[str]) -> set[str]:
    """All case spellings of short markers, so matching skips a lower() pass."""
    out: set[str] = set()
    for marker in markers:
        if len(marker) <= 6:
            letters = [(c.lower(), c.upper()) if c.isalpha() else (c,) for c in marker]
            head = [""]
            for options in letters:
                head = [prefix + c for prefix in head for c in options]
            out.update(head)
        else:
            out.update({marker.lower(), marker.upper(), marker.title()})
    return out


# ---------------------------------------------------------------------------
# timestamps


def parse_timestamp(raw: str, fmt: str = "iso8601", row: int | None = None) -> float:
    """Parse one timestamp cell to epoch seconds (UTC).

    ``fmt`` is ``iso8601``, ``epoch-seconds``, ``epoch-milliseconds`` or a
    strptime pattern. Raises FormatViolationError carrying ``row`` on
    non-conforming text.
    """
    text = raw.strip()
    try:
        if fmt == "iso8601":
            dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
            if dt.tzinfo is None:
                dt = dt.replace(tzinfo=timezone.utc)
            return dt.timestamp()
        if fmt == "epoch-seconds":
            return float(text)
        if fmt == "epoch-milliseconds":
            return float(text) / 1000.0
        dt = datetime.strptime(text, fmt)
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return dt.timestamp()
    except (ValueError, OverflowError) as exc:
        raise FormatViolationError(
            f"timestamp {raw!r} does not match format {fmt!r}", row=row
        ) from exc


def render_timestamp(instant: float, fmt: str = "iso8601") -> str:
    """Canonical text for an epoch instant; parse -> render normalizes."""
    if fmt == "epoch-seconds":
        return format(instant, ".6f").rstrip("0").rstrip(".")
    if fmt == "epoch-milliseconds":
        return format(instant * 1000.0, ".3f").rstrip("0").rstrip(".")
    dt = datetime.fromtimestamp(instant, tz=timezone.utc).replace(tzinfo=None)
    return dt.isoformat()


def _parse_timestamp_column(col: pd.Series, fmt: str) -> np.ndarray:
    if fmt == "epoch-seconds":
        return pd.to_numeric(col, errors="coerce").to_numpy(dtype=np.float64)
    if fmt == "epoch-milliseconds":
        return pd.to_numeric(col, errors="coerce").to_numpy(dtype=np.float64) / 1000.0
    pd_fmt = "ISO8601" if fmt == "iso8601" else fmt
    parsed = pd.to_datetime(col, errors="coerce", format=pd_fmt, utc=True)
    out = parsed.astype("int64").to_numpy(dtype=np.float64) / 1e9
    out[parsed.isna().to_numpy()] = np.nan
    return out


# ---------------------------------------------------------------------------
# schema / config documents


def load_schema_document(source: str | Path | dict | list) -> list[FeatureSchema]:
    """Read the feature-schema JSON document (a list of feature objects)."""
    doc = _read_json(source)
    if isinstance(doc, dict):
        doc = doc.get("features", doc)
    if not isinstance(doc, list):
        raise SchemaError("schema document must be a list of feature objects")
    schemas = []
    for entry in doc:
        try:
            schemas.append(FeatureSchema(**entry))
        except TypeError as exc:
            raise SchemaError(f"bad schema entry {entry!r}: {exc}") from exc
    names = [s.name for s in schemas]
    if len(set(names)) != len(names):
        raise SchemaError("feature names must be unique")
    return schemas


def load_config_document(source: str | Path | dict, **overrides) -> ProfilerConfig:
    """Read the profiler-config JSON document, with keyword overrides."""
    doc = _read_json(source)
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    doc = dict(doc)
    doc.update({k: v for k, v in overrides.items() if v is not None})
    known = set(ProfilerConfig.__dataclass_fields__)
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("veracity_weights", "variability_weights", "seasonal_periods", "missing_markers"):
        if key in doc and isinstance(doc[key], list):
            doc[key] = tuple(doc[key])
    if "spike_bounds" in doc and isinstance(doc["spike_bounds"], dict):
        doc["spike_bounds"] = {
            name: (float(lo), float(hi)) for name, (lo, hi) in doc["spike_bounds"].items()
        }
    try:
        return ProfilerConfig(**doc)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _read_json(source):
    if isinstance(source, (dict, list)):
        return source
    with open(source, "r", encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# cell conversion


def _markup_mask(text: pd.Series, candidates) -> np.ndarray:
    """True where a candidate cell holds a nested key-value or markup payload."""
    mask = np.zeros(len(text), dtype=bool)
    idx = np.flatnonzero(candidates) if isinstance(candidates, np.ndarray) else candidates
    for i in idx:
        cell = text.iat[int(i)]
        if not isinstance(cell, str):
            continue
        cell = cell.lstrip()
        if cell.startswith("<"):
            mask[i] = bool(_XML_RE.search(cell))
            continue
        if not cell.startswith(("{", "[")):
            continue
        try:
            payload = json.loads(cell)
        except (ValueError, RecursionError):
            continue
        mask[i] = isinstance(payload, (dict, list))
    return mask


def _canonical_number(x: float) -> str:
    return format(x, ".12g")


def _convert_feature(
    text: pd.Series, schema: FeatureSchema, missing: np.ndarray, ts_format: str
) -> tuple[np.ndarray, tuple[str, ...], np.ndarray, np.ndarray]:
    """Convert one string column.

    Returns (values, categories, valid_mask, markup_mask). ``values`` are
    floats for continuous kinds and first-appearance category codes for
    categorical kinds; non-conforming and missing cells are NaN.
    """
    fmt = schema.expected_format
    n = len(text)

    if fmt == "float":
        numbers = pd.to_numeric(text, errors="coerce").to_numpy(dtype=np.float64)
        valid = ~np.isnan(numbers) & ~missing
        tokens = None
    elif fmt == "integer":
        valid = text.str.fullmatch(_INT_RE).to_numpy() & ~missing
        numbers = np.full(n, np.nan)
        if valid.any():
            numbers[valid] = pd.to_numeric(text[valid]).to_numpy(dtype=np.float64)
        tokens = None
    elif fmt == "boolean":
        mapped = text.str.strip().str.lower().map(_BOOL_TOKENS)
        numbers = mapped.to_numpy(dtype=np.float64, na_value=np.nan)
        valid = ~np.isnan(numbers) & ~missing
        tokens = np.where(numbers == 1.0, "true", "false")
    elif fmt == "timestamp":
        numbers = _parse_timestamp_column(text, ts_format)
        valid = ~np.isnan(numbers) & ~missing
        tokens = None
        if schema.kind == CATEGORICAL and valid.any():
            tokens = np.array([render_timestamp(v) if ok else "" for v, ok in zip(numbers, valid)])
    elif fmt == "category-text":
        valid = ~missing
        numbers = None
        tokens = text.str.strip().to_numpy(dtype=object)
    else:  # pragma: no cover - formats validated by FeatureSchema
        raise SchemaError(f"unhandled format {fmt!r}")

    # payload shapes never parse as numbers/booleans, so for those formats the
    # markup scan only needs the cells that failed; free text accepts anything,
    # so there the whole column is prefiltered
    if fmt == "category-text":
        candidates = valid & text.str.startswith(("{", "[", "<")).to_numpy()
    else:
        candidates = ~valid & ~missing
    markup = _markup_mask(text, candidates) if candidates.any() else np.zeros(n, dtype=bool)

    if schema.kind == CONTINUOUS:
        values = np.where(valid, numbers, np.nan)
        return values, (), valid, markup

    # categorical: encode tokens (or canonical numeric text) in first-appearance order
    if tokens is None:
        tokens = np.array(
            [_canonical_number(v) if ok else "" for v, ok in zip(numbers, valid)], dtype=object
        )
    token_series = pd.Series(np.where(valid, tokens, None), dtype=object)
    codes, uniques = pd.factorize(token_series, use_na_sentinel=True)
    values = codes.astype(np.float64)
    values[codes < 0] = np.nan
    return values, tuple(str(u) for u in uniques), valid, markup


# ---------------------------------------------------------------------------
# dataset loading


def load_dataset(
    source: str | Path | IO[str],
    schema: Iterable[FeatureSchema],
    config: ProfilerConfig,
) -> Dataset:
    """Load a delimited text export into the internal dataset model.

    Rows are stable-sorted by timestamp; cells that fail their declared
    format become missing markers with a recorded violation. Fatal errors
    (missing columns, empty input) raise SchemaError.
    """
    schemas = list(schema)
    if not schemas:
        raise SchemaError("schema declares no features")

    markers = {m.lower() for m in DEFAULT_MISSING_MARKERS}
    markers.update(m.lower() for m in config.missing_markers)
    marker_variants = sorted(_marker_variants(markers))

    # columns whose format check needs the raw text are read as strings; plain
    # float columns stay on the parser's native numeric path (a violation there
    # falls back to object dtype, detected below)
    dtype_map: dict[str, type] = {}
    for fs in schemas:
        if not (fs.kind == CONTINUOUS and fs.expected_format == "float"):
            dtype_map[fs.name] = str
    if config.timestamp_format not in ("epoch-seconds", "epoch-milliseconds"):
        dtype_map[config.timestamp_column] = str
    try:
        frame = pd.read_csv(
            source,
            sep=config.delimiter,
            dtype=dtype_map or None,
            na_values=marker_variants,
            keep_default_na=False,
            encoding="utf-8",
            engine="c",
            low_memory=False,
        )
    except pd.errors.EmptyDataError as exc:
        raise SchemaError("input file is empty") from exc

    if config.timestamp_column not in frame.columns:
        raise SchemaError(f"timestamp column {config.timestamp_column!r} not in header")
    for fs in schemas:
        if fs.name not in frame.columns:
            raise SchemaError(f"schema feature {fs.name!r} not in header")
    if len(frame) == 0:
        raise SchemaError("input file has a header but no data rows")

    log: list[str] = []
    ts_raw = frame[config.timestamp_column]
    ts = _parse_timestamp_column(ts_raw, config.timestamp_format)
    bad_ts = np.isnan(ts)
    if bad_ts.any():
        for i in np.flatnonzero(bad_ts):
            log.append(f"row {i}: unparseable timestamp {ts_raw.iat[int(i)]!r}, row dropped")
        frame = frame.loc[~bad_ts]
        source_rows = frame.index.to_numpy()
        frame = frame.reset_index(drop=True)
        ts = ts[~bad_ts]
    else:
        source_rows = np.arange(len(frame))
    if len(frame) == 0:
        raise SchemaError("no rows with parseable timestamps")

    order = np.argsort(ts, kind="stable")
    ts_sorted = ts[order]

    features: list[tuple[FeatureSchema, TimedSeries]] = []
    violations: dict[str, list[tuple[int, str, str]]] = {}
    cell_stats: dict[str, dict[str, int]] = {}
    for fs in schemas:
        col = frame[fs.name]
        if fs.kind == CONTINUOUS and fs.expected_format == "float" and col.dtype == np.float64:
            # clean numeric column: markers became NaN in the parser, nothing
            # else can have survived as a float
            values = col.to_numpy(dtype=np.float64)
            missing = np.isnan(values)
            valid = ~missing
            bad = np.zeros(len(col), dtype=bool)
            markup = bad
            categories: tuple[str, ...] = ()
        else:
            missing = col.isna().to_numpy()
            text = col.fillna("") if fs.name in dtype_map else col
            values, categories, valid, markup = _convert_feature(
                text, fs, missing, config.timestamp_format
            )
            bad = ~valid & ~missing
            # padded or unusually cased markers land here; reclassify them
            for i in np.flatnonzero(bad):
                cell = col.iat[int(i)]
                if isinstance(cell, str) and cell.strip().lower() in markers:
                    missing[i] = True
                    bad[i] = False
        feature_violations = [
            (int(source_rows[i]), str(col.iat[int(i)]), fs.expected_format)
            for i in np.flatnonzero(bad)
        ]
        violations[fs.name] = feature_violations
        if feature_violations:
            log.append(f"feature {fs.name}: {len(feature_violations)} format violations")
        cell_stats[fs.name] = {
            "total": int(len(col)),
            "missing": int(missing.sum()),
            "conforming": int((valid & ~markup).sum()),
            "markup": int(markup.sum()),
            "freetext": int((bad & ~markup).sum()),
        }
        features.append(
            (fs, TimedSeries(ts_sorted, values[order], kind=fs.kind, categories=categories))
        )

    ni = int(np.unique(ts_sorted).size)
    return Dataset(
        name=config.dataset_name,
        features=features,
        ni=ni,
        n_rows=int(len(frame)),
        violations=violations,
        cell_stats=cell_stats,
        load_log=log,
    )


def validate_schema(ds: Dataset, schema: Iterable[FeatureSchema]) -> dict[str, list[tuple[int, str, str]]]:
    """Per-feature format violations recorded at load time.

    Each violation is (source row index, cell text, expected format). An
    empty list for every feature means the dataset conforms. Validation
    never raises.
    """
    return {fs.name: list(ds.violations.get(fs.name, [])) for fs in schema}


def check_cell(cell: str, fmt: str, ts_format: str = "iso8601") -> bool:
    """Reference single-cell format check (used by the violation oracle)."""
    text = cell.strip()
    if fmt == "float":
        try:
            float(text)
            return True
        except ValueError:
            return False
    if fmt == "integer":
        return bool(_INT_RE.fullmatch(text))
    if fmt == "boolean":
        return text.lower() in _BOOL_TOKENS
    if fmt == "timestamp":
        try:
            parse_timestamp(text, ts_format)
            return True
        except FormatViolationError:
            return False
    if fmt == "category-text":
        return True
    raise SchemaError(f"unknown format {fmt!r}")
