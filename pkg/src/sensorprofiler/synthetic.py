"""Synthetic sensor exports with injected, exactly-known defects.

The generator lays values on a perfect timestamp lattice and then injects
duplicate rows (same or different values per feature), missing runs sized per
span class, quartile-fence outliers, and isolated row removals (each removal
yields exactly one irregular interval). Every defect is placed with a
one-row halo so counts never interact, which makes the recorded ground truth
exact by construction.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .types import CATEGORICAL, CONTINUOUS, FeatureSchema, ProfilerConfig

BASE_LO, BASE_HI = 10.0, 20.0
OUTLIER_VALUE = 1000.0


@dataclass
class FeatureTruth:
    dts: int = 0
    dtd: int = 0
    sms: int = 0
    mms: int = 0
    lms: int = 0
    missing_count: int = 0
    outliers: int | None = None
    pmv_old: float = 0.0
    pmv_new: float = 0.0


@dataclass
class GroundTruth:
    rows: int  # lattice rows before removals
    removed_rows: int
    irregular_intervals: int
    resolved_length: int
    features: dict[str, FeatureTruth] = field(default_factory=dict)


@dataclass
class SyntheticDataset:
    csv_text: str
    schemas: list[FeatureSchema]
    config: ProfilerConfig
    truth: GroundTruth

    def stream(self) -> io.StringIO:
        return io.StringIO(self.csv_text)


class _Allocator:
    """Hands out non-overlapping index blocks with a one-slot halo."""

    def __init__(self, n: int, rng: np.random.Generator):
        self.free = np.ones(n, dtype=bool)
        self.free[0] = self.free[-1] = False
        self.rng = rng
        self.n = n

    def clone(self) -> "_Allocator":
        other = _Allocator.__new__(_Allocator)
        other.free = self.free.copy()
        other.rng = self.rng
        other.n = self.n
        return other

    def take(self, length: int, tries: int = 200) -> int | None:
        for _ in range(tries):
            start = int(self.rng.integers(1, self.n - length))
            if self.free[start - 1 : start + length + 1].all():
                self.free[start - 1 : start + length + 1] = False
                return start
        return None


def generate(
    seed: int,
    n_rows: int = 1200,
    n_features: int = 3,
    interval: float = 10.0,
    n_removals: int = 2,
    n_dts: int = 2,
    n_dtd: int = 1,
    n_sms: int = 2,
    n_mms: int = 1,
    n_lms: int = 1,
    n_outliers: int = 3,
    categorical_last: bool = False,
    name: str = "synthetic",
) -> SyntheticDataset:
    """Build one export with the requested defect counts (trimmed down when
    the lattice cannot host them all without overlap)."""
    rng = np.random.default_rng(seed)
    n = int(n_rows)
    t0 = 1_600_000_000 // int(interval) * int(interval)
    timestamps = t0 + interval * np.arange(n)

    sms_len_max = 3
    mms_len_max = 8
    config = ProfilerConfig(
        expected_interval=float(interval),
        sms_max=sms_len_max * interval,
        mms_max=mms_len_max * interval,
        timestamp_format="epoch-seconds",
        dataset_name=name,
    )

    schemas: list[FeatureSchema] = []
    for i in range(n_features):
        if categorical_last and i == n_features - 1:
            schemas.append(
                FeatureSchema(f"f{i + 1}", kind=CATEGORICAL, expected_format="category-text")
            )
        else:
            schemas.append(FeatureSchema(f"f{i + 1}", kind=CONTINUOUS, expected_format="float"))

    shared = _Allocator(n, rng)

    removals = []
    for _ in range(n_removals):
        pos = shared.take(1)
        if pos is not None:
            removals.append(pos)
    removal_set = set(removals)

    dup_rows: dict[int, list[bool]] = {}  # row -> per-feature same-value flag
    n_groups_same = 0
    n_groups_diff = 0
    for want_same in [True] * n_dts + [False] * n_dtd:
        pos = shared.take(1)
        if pos is None:
            continue
        if want_same:
            flags = [True] * n_features
            n_groups_same += 1
        else:
            # different on every feature keeps the per-feature counts simple
            flags = [False] * n_features
            n_groups_diff += 1
        dup_rows[pos] = flags

    columns: list[np.ndarray] = []
    tokens = np.array(["on", "off", "idle", "fault"])
    truth = GroundTruth(
        rows=n,
        removed_rows=len(removals),
        irregular_intervals=len(removals),
        resolved_length=n - len(removals),
    )

    for fi, schema in enumerate(schemas):
        alloc = shared.clone()
        if schema.kind == CATEGORICAL:
            values = tokens[rng.integers(0, len(tokens), n)].astype(object)
        else:
            values = rng.uniform(BASE_LO, BASE_HI, n).astype(object)

        ft = FeatureTruth()
        missing_positions: list[int] = []
        for label, count, lo_len, hi_len in (
            ("sms", n_sms, 1, sms_len_max),
            ("mms", n_mms, sms_len_max + 1, mms_len_max),
            ("lms", n_lms, mms_len_max + 1, mms_len_max + 3),
        ):
            for _ in range(count):
                length = int(rng.integers(lo_len, hi_len + 1))
                start = alloc.take(length)
                if start is None:
                    continue
                missing_positions.extend(range(start, start + length))
                setattr(ft, label, getattr(ft, label) + 1)
        for pos in missing_positions:
            values[pos] = None

        if schema.kind == CONTINUOUS:
            placed = 0
            for _ in range(n_outliers):
                pos = alloc.take(1)
                if pos is None:
                    continue
                values[pos] = OUTLIER_VALUE if rng.random() < 0.5 else -OUTLIER_VALUE
                placed += 1
            ft.outliers = placed

        ft.missing_count = len(missing_positions)
        ft.pmv_old = ft.missing_count / truth.resolved_length
        ft.pmv_new = (ft.missing_count + len(removals)) / n
        ft.dts = n_groups_same
        ft.dtd = n_groups_diff
        truth.features[schema.name] = ft
        columns.append(values)

    # sanity: injected outliers must be the only values beyond the fences
    for fi, schema in enumerate(schemas):
        if schema.kind != CONTINUOUS:
            continue
        present = np.array([v for v in columns[fi] if v is not None], dtype=np.float64)
        base = present[np.abs(present) < OUTLIER_VALUE / 2]
        q1, q3 = np.quantile(present, [0.25, 0.75])
        iqr = q3 - q1
        assert base.min() > q1 - 1.5 * iqr and base.max() < q3 + 1.5 * iqr, "fence margin too thin"

    lines = ["timestamp," + ",".join(s.name for s in schemas)]
    for row in range(n):
        if row in removal_set:
            continue
        emit_rows = [(False, None)]
        if row in dup_rows:
            emit_rows.append((True, dup_rows[row]))
        for is_dup, flags in emit_rows:
            cells = [format(timestamps[row], ".1f")]
            for fi, schema in enumerate(schemas):
                v = columns[fi][row]
                if v is None:
                    cells.append("")
                elif is_dup and not flags[fi]:
                    if schema.kind == CATEGORICAL:
                        cells.append("dup-" + str(v))
                    else:
                        cells.append(format(float(v) + 1.5, ".6f"))
                elif schema.kind == CATEGORICAL:
                    cells.append(str(v))
                else:
                    cells.append(format(float(v), ".6f"))
            lines.append(",".join(cells))

    return SyntheticDataset(
        csv_text="\n".join(lines) + "\n",
        schemas=schemas,
        config=config,
        truth=truth,
    )


def generate_clean(
    seed: int,
    n_rows: int,
    n_features: int,
    interval: float = 10.0,
    name: str = "clean",
) -> SyntheticDataset:
    """Defect-free export on a perfect lattice (used by determinism and
    performance checks)."""
    rng = np.random.default_rng(seed)
    t0 = 1_600_000_000
    timestamps = t0 + interval * np.arange(n_rows)
    schemas = [FeatureSchema(f"f{i + 1}", CONTINUOUS, "float") for i in range(n_features)]
    data = rng.normal(50.0, 5.0, size=(n_rows, n_features))

    buf = io.StringIO()
    buf.write("timestamp," + ",".join(s.name for s in schemas) + "\n")
    ts_col = np.char.mod("%.1f", timestamps)
    cols = [np.char.mod("%.6f", data[:, i]) for i in range(n_features)]
    for chunk_start in range(0, n_rows, 65536):
        chunk_end = min(chunk_start + 65536, n_rows)
        block = np.column_stack(
            [ts_col[chunk_start:chunk_end]] + [c[chunk_start:chunk_end] for c in cols]
        )
        buf.write("\n".join(",".join(row) for row in block) + "\n")

    config = ProfilerConfig(
        expected_interval=float(interval),
        timestamp_format="epoch-seconds",
        dataset_name=name,
    )
    truth = GroundTruth(
        rows=n_rows, removed_rows=0, irregular_intervals=0, resolved_length=n_rows
    )
    for s in schemas:
        truth.features[s.name] = FeatureTruth(outliers=None)
    return SyntheticDataset(buf.getvalue(), schemas, config, truth)
