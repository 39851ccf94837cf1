"""Report emission: a machine-readable JSON document and a human table view.

Machine format: UTF-8 JSON, keys sorted, numbers at 12 significant digits,
infinities as the token ``"+inf"``/``"-inf"``, undefined values as null. The
document is self-contained: every score can be recomputed from the stored
indicators, which ``verify`` checks.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict

import numpy as np

from . import scoring
from .pipeline import DatasetProfile
from .types import CategoricalProfile, ProfilerConfig, Recommendation, ValueProfile

REPORT_VERSION = 1


# ---------------------------------------------------------------------------
# value rendering


def _render(value):
    """Round floats to 12 significant digits; map non-finite to tokens."""
    if isinstance(value, dict):
        return {str(k): _render(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_render(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_render(float(v)) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "+inf" if value > 0 else "-inf"
        return float(format(value, ".12g"))
    return value


def _unrender_number(value):
    if value == "+inf":
        return math.inf
    if value == "-inf":
        return -math.inf
    return value


# ---------------------------------------------------------------------------
# document building


def profile_to_document(
    profile: DatasetProfile, recommendations: list[Recommendation] | None = None
) -> dict:
    config = asdict(profile.config)
    if config["spike_bounds"] is not None:
        config["spike_bounds"] = {k: list(v) for k, v in config["spike_bounds"].items()}
    doc = {
        "version": REPORT_VERSION,
        "dataset": {
            "name": profile.name,
            "nf": profile.nf,
            "ni": profile.ni,
            "rows": profile.n_rows,
        },
        "config": config,
        "grid": {
            "start": profile.grid.start,
            "end": profile.grid.end,
            "interval": profile.grid.interval,
            "slots": profile.grid.slots,
        },
        "pcdf": profile.pcdf,
        "forms": {
            "per_feature": profile.forms,
            "psd": profile.form_distribution.psd,
            "pud": profile.form_distribution.pud,
            "pssd": profile.form_distribution.pssd,
        },
        "features": [_feature_doc(fr) for fr in profile.features],
        "correlation": {
            "threshold": profile.config.correlation_threshold,
            "use_abs": profile.config.correlation_use_abs,
            "pairs": [
                {
                    "a": res.feature_a,
                    "b": res.feature_b,
                    "value": res.best_value,
                    "lag": res.best_lag,
                }
                for res in profile.matrix.entries.values()
            ],
        },
        "scores": {
            "vol": profile.scores.vol,
            "varie": profile.scores.varie,
            "vel": profile.scores.vel,
            "ver": profile.scores.ver,
            "val": profile.scores.val,
            "varia": profile.scores.varia,
            "components": dict(profile.scores.components),
        },
        "recommendations": [
            {
                "dimension": rec.dimension,
                "rule": rec.rule_id,
                "severity": rec.severity,
                "trigger": rec.trigger,
                "action": rec.action,
                "evidence": rec.evidence,
            }
            for rec in (recommendations or [])
        ],
        "log": list(profile.log),
    }
    return _render(doc)


def _feature_doc(fr) -> dict:
    if isinstance(fr.stats, ValueProfile):
        stats = {
            "cardinality": fr.stats.cardinality,
            "min": fr.stats.minimum,
            "q1": fr.stats.q1,
            "mean": fr.stats.mean,
            "median": fr.stats.median,
            "q3": fr.stats.q3,
            "max": fr.stats.maximum,
            "std": fr.stats.std,
            "skewness": fr.stats.skewness,
            "excess_kurtosis": fr.stats.excess_kurtosis,
        }
    else:
        stats = {
            "cardinality": fr.stats.cardinality,
            "mode": fr.stats.mode,
            "mode_freq": fr.stats.mode_freq,
            "mode_pct": fr.stats.mode_pct,
        }
    return {
        "name": fr.name,
        "kind": fr.kind,
        "cdf": fr.cdf,
        "violations": fr.violation_count,
        "form": fr.form,
        "duplicates": {
            "dts": fr.duplicates.dts,
            "dtd": fr.duplicates.dtd,
            "groups": [
                {"timestamp": g.timestamp, "rows": g.rows, "same_value": g.same_value}
                for g in fr.duplicates.groups
            ],
        },
        "intervals": {
            "expected": fr.intervals.expected,
            "total": fr.intervals.total_intervals,
            "normal": fr.intervals.normal_intervals,
            "pti": fr.intervals.pti,
            "irregular_positions": fr.intervals.irregular_positions,
        },
        "missing_old": _missing_doc(fr.missing_old),
        "missing_new": _missing_doc(fr.missing_new),
        "spikes": None
        if fr.spikes is None
        else {
            "nas": fr.spikes.nas,
            "insufficient": fr.spikes.insufficient,
            "events": [[t, v] for t, v in fr.spikes.events],
        },
        "stats": stats,
        "outliers": None
        if fr.outliers is None
        else {
            "defined": fr.outliers.defined,
            "q1": fr.outliers.q1,
            "q3": fr.outliers.q3,
            "iqr": fr.outliers.iqr,
            "lower": fr.outliers.lower,
            "upper": fr.outliers.upper,
            "count": len(fr.outliers.indices),
            "indices": fr.outliers.indices,
            "rate": fr.outliers.rate,
        },
        "acf": fr.acf,
        "seasonality": {
            "flag": fr.seasonality.seasonal,
            "period": fr.seasonality.period,
            "low_confidence": fr.seasonality.low_confidence,
        },
        "factors": dict(fr.factors),
        "alignment_drops": fr.alignment_drops,
    }


def _missing_doc(rep) -> dict:
    return {
        "pmv": rep.pmv,
        "sms": rep.sms,
        "mms": rep.mms,
        "lms": rep.lms,
        "missing": rep.missing_count,
        "total": rep.total_count,
        "spans": [
            {"start": s.start, "end": s.end, "length": s.length, "label": s.label}
            for s in rep.spans
        ],
    }


# ---------------------------------------------------------------------------
# emission / parsing


def emit_machine(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def emit_report(
    profile: DatasetProfile,
    recommendations: list[Recommendation] | None = None,
    fmt: str = "machine",
) -> str:
    if fmt == "machine":
        return emit_machine(profile_to_document(profile, recommendations))
    if fmt == "human":
        return human_report(profile, recommendations or [])
    raise ValueError(f"unknown report format {fmt!r}")


def parse_report(text: str) -> dict:
    """Parse a machine report back to its document form."""
    return json.loads(text)


# ---------------------------------------------------------------------------
# self-consistency


def verify(doc: dict, rtol: float = 1e-9) -> list[str]:
    """Recompute every score from the document's stored indicators.

    Returns a list of mismatch descriptions; empty means self-consistent.
    """
    problems: list[str] = []
    scores = doc["scores"]
    feats = doc["features"]

    def close(a, b) -> bool:
        a = _unrender_number(a)
        b = _unrender_number(b)
        if a is None or b is None:
            return a is None and b is None
        if math.isinf(a) or math.isinf(b):
            return a == b
        return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))

    vol = doc["dataset"]["nf"] * doc["dataset"]["ni"]
    if scores["vol"] != vol:
        problems.append(f"vol: stored {scores['vol']} recomputed {vol}")

    rest = doc["forms"]["pud"] + doc["forms"]["pssd"]
    varie = math.inf if rest == 0 else doc["forms"]["psd"] / rest
    if not close(scores["varie"], varie):
        problems.append(f"varie: stored {scores['varie']} recomputed {varie}")

    if not close(scores["vel"], doc["config"]["expected_interval"]):
        problems.append("vel: does not match the configured interval")

    pcdf = sum(1 for f in feats if f["cdf"]) / len(feats) if feats else 0.0
    if not close(doc["pcdf"], pcdf):
        problems.append("pcdf: does not match the per-feature flags")

    nas = [f["spikes"]["nas"] for f in feats if f["spikes"] is not None]
    ptis = [f["intervals"]["pti"] for f in feats if f["intervals"]["pti"] is not None]
    pmvs = [f["missing_old"]["pmv"] for f in feats]
    ni = doc["dataset"]["ni"]
    if ni > 2 and ptis and pmvs:
        w = doc["config"]["veracity_weights"]
        mean_nas = sum(nas) / len(nas) if nas else 0.0
        ver = (
            (1 - pcdf) * w[0]
            + (mean_nas / (ni - 2)) * w[1]
            + (1 - sum(ptis) / len(ptis)) * w[2]
            + (sum(pmvs) / len(pmvs)) * w[3]
        )
        if not close(scores["ver"], ver):
            problems.append(f"ver: stored {scores['ver']} recomputed {ver}")

    validity = {f["name"]: f["factors"] for f in feats}
    val, _, _ = scoring.score_value(validity)
    if not close(scores["val"], val):
        problems.append(f"val: stored {scores['val']} recomputed {val}")

    stds = [
        f["stats"].get("std")
        for f in feats
        if f["kind"] == "continuous"
    ]
    rates = [
        f["outliers"]["rate"]
        for f in feats
        if f["outliers"] is not None and f["outliers"]["defined"]
    ]
    pair_values = [p["value"] for p in doc["correlation"]["pairs"]]
    if any(v is not None for v in stds):
        varia, nstd, po, vc = scoring.score_variability(
            stds,
            rates,
            pair_values,
            doc["correlation"]["threshold"],
            tuple(doc["config"]["variability_weights"]),
        )
        if not close(scores["varia"], varia):
            problems.append(f"varia: stored {scores['varia']} recomputed {varia}")

    return problems


def load_report(text: str, check: bool = True) -> dict:
    doc = parse_report(text)
    if check:
        problems = verify(doc)
        if problems:
            raise ValueError("report fails self-consistency: " + "; ".join(problems))
    return doc


# ---------------------------------------------------------------------------
# human tables


def _fmt(value, pct: bool = False) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        if math.isinf(value):
            return "+inf" if value > 0 else "-inf"
        if pct:
            return format(value * 100.0, ".4g") + "%"
        return format(value, ".6g")
    return str(value)


def _table(rows: list[list[str]]) -> list[str]:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]


def human_report(profile: DatasetProfile, recommendations: list[Recommendation]) -> str:
    lines: list[str] = []
    s = profile.scores
    lines.append(f"Dataset {profile.name}: {profile.nf} features x {profile.ni} instances")
    lines.append("")
    lines.append("Scores")
    lines += _table(
        [
            ["", "Volume", "Variety", "Velocity", "Veracity", "Value", "Variability"],
            ["", "Vol", "Varie", "Vel", "Ver", "Val", "Varia"],
            [
                "",
                str(s.vol),
                _fmt(s.varie),
                _fmt(s.vel) + "s",
                "n/a" if s.ver is None else format(s.ver, ".4g"),
                "n/a" if s.val is None else format(s.val, ".4g"),
                "n/a" if s.varia is None else format(s.varia, ".4g"),
            ],
        ]
    )
    lines.append("")

    names = [fr.name for fr in profile.features]
    rows = [["indicator"] + names]
    rows.append(["form"] + [profile.forms[n] for n in names])
    rows.append(["CDF"] + [_fmt(fr.cdf) for fr in profile.features])
    rows.append(
        ["NAS"] + ["n/a" if fr.spikes is None else str(fr.spikes.nas) for fr in profile.features]
    )
    rows.append(["PTI"] + [_fmt(fr.intervals.pti, pct=True) for fr in profile.features])
    rows.append(
        ["DTS/DTD"]
        + [f"{fr.duplicates.dts}/{fr.duplicates.dtd}" for fr in profile.features]
    )
    rows.append(["PMV old"] + [_fmt(fr.missing_old.pmv, pct=True) for fr in profile.features])
    rows.append(["PMV new"] + [_fmt(fr.missing_new.pmv, pct=True) for fr in profile.features])
    rows.append(
        ["SMS/MMS/LMS"]
        + [
            f"{fr.missing_new.sms}/{fr.missing_new.mms}/{fr.missing_new.lms}"
            for fr in profile.features
        ]
    )
    rows.append(
        ["outlier rate"]
        + [
            "n/a"
            if fr.outliers is None or not fr.outliers.defined
            else _fmt(fr.outliers.rate, pct=True)
            for fr in profile.features
        ]
    )
    lines.append("Indicators")
    lines += _table(rows)
    lines.append("")

    stat_rows = [["factor"] + names]
    factor_fields = [
        ("cardinality", "cardinality"),
        ("min", "minimum"),
        ("max", "maximum"),
        ("mean", "mean"),
        ("median", "median"),
        ("std", "std"),
        ("skewness", "skewness"),
        ("excess kurtosis", "excess_kurtosis"),
        ("1st qrt", "q1"),
        ("3rd qrt", "q3"),
    ]
    for label, attr in factor_fields:
        row = [label]
        for fr in profile.features:
            row.append(_fmt(getattr(fr.stats, attr, None)))
        stat_rows.append(row)
    stat_rows.append(["mode"] + [_fmt(getattr(fr.stats, "mode", None)) for fr in profile.features])
    stat_rows.append(
        ["seasonality"] + [_fmt(fr.seasonality.seasonal) for fr in profile.features]
    )
    lines.append("Statistical factors")
    lines += _table(stat_rows)
    lines.append("")

    if profile.matrix.entries:
        lines.append("Best delayed correlations (value @ lag)")
        corr_rows = []
        for (a, b), res in profile.matrix.entries.items():
            if res.defined:
                corr_rows.append([f"{a}~{b}", f"{res.best_value:.4f} @ {res.best_lag:+d}"])
            else:
                corr_rows.append([f"{a}~{b}", "undefined"])
        lines += _table(corr_rows)
        lines.append("")

    lines.append("Recommendations")
    if recommendations:
        for rec in recommendations:
            lines.append(f"  [{rec.severity}] ({rec.dimension}) {rec.action}")
            lines.append(f"        trigger: {rec.trigger}")
    else:
        lines.append("  none")
    lines.append("")
    return "\n".join(lines)
