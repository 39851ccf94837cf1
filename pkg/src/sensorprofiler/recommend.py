"""Rule-based preprocessing recommendations.

The rule table lives in ``recommendation_rules.json`` (versioned package
data); this module only evaluates the named predicates against a finished
profile, so the indicator-to-advice mapping stays auditable. Every emitted
recommendation carries the evidence that made its predicate true, and
``holds`` re-evaluates a recommendation against a profile.
"""

from __future__ import annotations

import json
from importlib import resources

from .pipeline import DatasetProfile
from .types import CATEGORICAL, CategoricalProfile, ProfilerConfig, Recommendation, ValueProfile


def _load_rules() -> dict:
    with resources.files(__package__).joinpath("recommendation_rules.json").open(
        "r", encoding="utf-8"
    ) as fh:
        return json.load(fh)


def _low_rate_spikes(profile: DatasetProfile, config: ProfilerConfig, params: dict) -> dict:
    max_rate = params.get("max_rate", 0.01)
    evidence = {}
    for fr in profile.features:
        if fr.spikes is None or fr.spikes.nas == 0:
            continue
        rate = fr.spikes.nas / profile.ni
        if rate < max_rate:
            evidence[fr.name] = {"nas": fr.spikes.nas, "rate": rate}
    return evidence


def _imputable_missing(profile, config, params) -> dict:
    evidence = {}
    for fr in profile.features:
        rep = fr.missing_new
        if rep.missing_count > 0 and rep.lms == 0:
            evidence[fr.name] = {"pmv": rep.pmv, "sms": rep.sms, "mms": rep.mms}
    return evidence


def _lms_without_seasonality(profile, config, params) -> dict:
    evidence = {}
    for fr in profile.features:
        if fr.missing_new.lms > 0 and not fr.seasonality.seasonal:
            evidence[fr.name] = {"lms": fr.missing_new.lms, "seasonal": False}
    return evidence


def _dtd_present(profile, config, params) -> dict:
    return {
        fr.name: {"dtd": fr.duplicates.dtd}
        for fr in profile.features
        if fr.duplicates.dtd > 0
    }


def _dts_present(profile, config, params) -> dict:
    return {
        fr.name: {"dts": fr.duplicates.dts}
        for fr in profile.features
        if fr.duplicates.dts > 0
    }


def _nonstructured_present(profile, config, params) -> dict:
    fd = profile.form_distribution
    if fd.pud + fd.pssd > 0:
        return {"dataset": {"pud": fd.pud, "pssd": fd.pssd}}
    return {}


def _slow_production(profile, config, params) -> dict:
    req = config.velocity_requirement
    if req is not None and config.expected_interval > req:
        return {"dataset": {"interval": config.expected_interval, "required": req}}
    return {}


def _outliers_beyond_bounds(profile, config, params) -> dict:
    bounds = config.spike_bounds or {}
    evidence = {}
    for fr in profile.features:
        if fr.name not in bounds or fr.outliers is None or not fr.outliers.defined:
            continue
        if fr.outliers.indices:
            lo, hi = bounds[fr.name]
            evidence[fr.name] = {
                "outliers": len(fr.outliers.indices),
                "bounds": [lo, hi],
                "min": fr.stats.minimum,
                "max": fr.stats.maximum,
            }
    return evidence


def _outliers_present(profile, config, params) -> dict:
    bounds = config.spike_bounds or {}
    evidence = {}
    for fr in profile.features:
        if fr.name in bounds or fr.outliers is None or not fr.outliers.defined:
            continue
        if fr.outliers.indices:
            evidence[fr.name] = {
                "outliers": len(fr.outliers.indices),
                "rate": fr.outliers.rate,
                "min": fr.stats.minimum,
                "max": fr.stats.maximum,
            }
    return evidence


def _constant_features(profile, config, params) -> dict:
    evidence = {}
    for fr in profile.features:
        if isinstance(fr.stats, ValueProfile):
            if fr.stats.std == 0.0:
                evidence[fr.name] = {"std": 0.0, "value": fr.stats.mean}
        elif isinstance(fr.stats, CategoricalProfile):
            if fr.stats.cardinality == 1:
                evidence[fr.name] = {"cardinality": 1, "value": fr.stats.mode}
    return evidence


def _invalid_value_slots(profile, config, params) -> dict:
    evidence = {}
    for fr in profile.features:
        bad = sorted(name for name, ok in fr.factors.items() if not ok)
        if bad:
            evidence[fr.name] = {"undefined_factors": bad}
    return evidence


def _volume_above_threshold(profile, config, params) -> dict:
    threshold = config.volume_threshold
    if threshold is not None and profile.scores.vol > threshold:
        return {"dataset": {"vol": profile.scores.vol, "threshold": threshold}}
    return {}


_PREDICATES = {
    "low_rate_spikes": _low_rate_spikes,
    "imputable_missing": _imputable_missing,
    "lms_without_seasonality": _lms_without_seasonality,
    "dtd_present": _dtd_present,
    "dts_present": _dts_present,
    "nonstructured_present": _nonstructured_present,
    "slow_production": _slow_production,
    "outliers_beyond_bounds": _outliers_beyond_bounds,
    "outliers_present": _outliers_present,
    "constant_features": _constant_features,
    "invalid_value_slots": _invalid_value_slots,
    "volume_above_threshold": _volume_above_threshold,
}


def recommend(profile: DatasetProfile, config: ProfilerConfig) -> list[Recommendation]:
    """Evaluate the versioned rule table against a finished profile."""
    table = _load_rules()
    out: list[Recommendation] = []
    for rule in table["rules"]:
        predicate = _PREDICATES[rule["predicate"]]
        evidence = predicate(profile, config, rule.get("params", {}))
        if evidence:
            out.append(
                Recommendation(
                    dimension=rule["dimension"],
                    rule_id=rule["id"],
                    severity=rule["severity"],
                    trigger=rule["trigger"],
                    action=rule["action"],
                    evidence=evidence,
                )
            )
    return out


def holds(rec: Recommendation, profile: DatasetProfile, config: ProfilerConfig) -> bool:
    """Re-evaluate a recommendation's trigger against a profile."""
    table = _load_rules()
    for rule in table["rules"]:
        if rule["id"] == rec.rule_id:
            return bool(_PREDICATES[rule["predicate"]](profile, config, rule.get("params", {})))
    return False


def rule_table_version() -> int:
    return int(_load_rules()["version"])
