from __future__ import annotations

import io
import math

import numpy as np
import pytest

from conftest import (
    acf_oracle,
    cat_series,
    moments_oracle,
    outlier_oracle,
    quantile_oracle,
    series,
    spike_oracle,
)
from sensorprofiler.ingestion import load_dataset
from sensorprofiler.types import (
    DecompositionUnavailable,
    FeatureSchema,
    ProfilerConfig,
    TimedSeries,
)
from sensorprofiler.values import (
    analyze_missing,
    autocorrelation,
    categorical_profile,
    check_formats,
    classify_forms,
    continuous_profile,
    decompose,
    detect_outliers,
    detect_seasonality,
    detect_spikes,
)


def tiny_dataset(csv_text, schemas, **config_kw):
    config = ProfilerConfig(
        expected_interval=10.0, timestamp_format="epoch-seconds", **config_kw
    )
    return load_dataset(io.StringIO(csv_text), schemas, config)


class TestCheckFormats:
    def test_all_conformant(self):
        ds = tiny_dataset(
            "timestamp,a\n0,1.5\n10,2.5\n", [FeatureSchema("a", "continuous", "float")]
        )
        flags, pcdf, degenerate = check_formats(ds)
        assert flags == {"a": True} and pcdf == 1.0 and degenerate == []

    def test_partial(self):
        schemas = [
            FeatureSchema("a", "continuous", "integer"),
            FeatureSchema("b", "continuous", "float"),
            FeatureSchema("c", "continuous", "float"),
            FeatureSchema("d", "continuous", "float"),
        ]
        ds = tiny_dataset("timestamp,a,b,c,d\n0,abc,1,2,3\n10,4,1,2,3\n", schemas)
        flags, pcdf, _ = check_formats(ds)
        assert flags["a"] is False and pcdf == 0.75

    def test_all_missing_is_vacuously_correct(self):
        ds = tiny_dataset(
            "timestamp,a\n0,\n10,NA\n", [FeatureSchema("a", "continuous", "float")]
        )
        flags, pcdf, degenerate = check_formats(ds)
        assert flags["a"] is True and degenerate == ["a"]


class TestClassifyForms:
    def test_all_numeric_tabular(self):
        ds = tiny_dataset(
            "timestamp,a,b\n0,1,2\n10,3,4\n",
            [FeatureSchema("a"), FeatureSchema("b")],
        )
        forms, fd = classify_forms(ds)
        assert set(forms.values()) == {"structured"}
        assert (fd.psd, fd.pud, fd.pssd) == (1.0, 0.0, 0.0)

    def test_equal_split(self):
        schemas = [
            FeatureSchema("a"),
            FeatureSchema("b"),
            FeatureSchema("c", "categorical", "category-text", "unstructured"),
            FeatureSchema("d", "categorical", "category-text", "unstructured"),
        ]
        ds = tiny_dataset("timestamp,a,b,c,d\n0,1,2,x,y\n10,3,4,z,w\n", schemas)
        _, fd = classify_forms(ds)
        assert fd.psd == 0.5 and fd.pud == 0.5 and fd.pssd == 0.0

    def test_majority_markup_overrides_to_semi_structured(self):
        rows = ["timestamp,a"]
        for i in range(10):
            cell = '"{""k"": %d}"' % i if i < 6 else "plain text"
            rows.append(f"{i * 10},{cell}")
        ds = tiny_dataset(
            "\n".join(rows) + "\n",
            [FeatureSchema("a", "categorical", "category-text", "structured")],
        )
        forms, fd = classify_forms(ds)
        assert forms["a"] == "semi-structured"
        assert fd.pssd == 1.0

    def test_majority_freetext_overrides_to_unstructured(self):
        rows = ["timestamp,a"]
        for i in range(10):
            cell = "free form note" if i < 6 else str(i)
            rows.append(f"{i * 10},{cell}")
        ds = tiny_dataset(
            "\n".join(rows) + "\n", [FeatureSchema("a", "continuous", "float")]
        )
        forms, _ = classify_forms(ds)
        assert forms["a"] == "unstructured"

    def test_shares_sum_to_one(self):
        schemas = [
            FeatureSchema("a"),
            FeatureSchema("b", "categorical", "category-text", "semi-structured"),
            FeatureSchema("c", "categorical", "category-text", "unstructured"),
        ]
        ds = tiny_dataset("timestamp,a,b,c\n0,1,x,y\n10,2,z,w\n", schemas)
        _, fd = classify_forms(ds)
        assert abs(fd.psd + fd.pud + fd.pssd - 1.0) <= 1e-12


class TestAnalyzeMissing:
    def test_share(self):
        rep = analyze_missing(series([1, None, 3, None]), (30, 60), 10.0)
        assert rep.pmv == 0.5
        assert rep.missing_count == 2

    def test_span_classification_by_duration(self):
        # a 12-minute gap against (30 min, 6 h) thresholds is short-term
        s = series([1] + [None] * 12 + [2], interval=60.0)
        rep = analyze_missing(s, (1800.0, 21600.0), 60.0)
        assert (rep.sms, rep.mms, rep.lms) == (1, 0, 0)

    def test_span_boundaries(self):
        sms_max, mms_max = 30.0, 60.0
        s = series([1, None, None, None, 2, None, None, None, None, None, None, 3], interval=10.0)
        rep = analyze_missing(s, (sms_max, mms_max), 10.0)
        # 3-sample run = 30 s (short); 6-sample run = 60 s (medium)
        assert (rep.sms, rep.mms, rep.lms) == (1, 1, 0)

    def test_no_missing(self):
        rep = analyze_missing(series([1, 2, 3]), (30, 60), 10.0)
        assert rep.pmv == 0.0 and rep.spans == []

    def test_span_count_partition(self, rng):
        for _ in range(30):
            vals = [None if rng.random() < 0.3 else 1.0 for _ in range(60)]
            rep = analyze_missing(series(vals), (20.0, 50.0), 10.0)
            assert rep.sms + rep.mms + rep.lms == len(rep.spans)
            assert (rep.pmv == 0.0) == (rep.missing_count == 0)


class TestDetectSpikes:
    def test_constant_series(self):
        assert detect_spikes(series([5, 5, 5, 5]), 6.0).nas == 0

    def test_single_isolated_spike(self):
        rep = detect_spikes(series([0, 0, 100, 0, 0]), 6.0)
        assert rep.nas == 1
        assert rep.events[0] == (20.0, 100.0)

    def test_monotone_ramp_is_not_a_spike(self):
        assert detect_spikes(series([0, 10, 20, 30, 40]), 6.0).nas == 0

    def test_insufficient_data(self):
        rep = detect_spikes(series([1, 2]), 6.0)
        assert rep.insufficient and rep.nas == 0

    def test_bounds_rule(self):
        rep = detect_spikes(series([1, 2, 900, 2, 1]), 1e9, bounds=(0.0, 100.0))
        assert rep.nas == 1 and rep.events[0][1] == 900.0

    def test_bounds_only_interior(self):
        rep = detect_spikes(series([900, 1, 2, 1, 900]), 1e9, bounds=(0.0, 100.0))
        assert rep.nas == 0

    def test_gaps_are_compressed_before_the_scan(self):
        with_gap = series([0, None, 0, 100, 0, None, 0])
        no_gap = series([0, 0, 100, 0, 0])
        assert detect_spikes(with_gap, 6.0).nas == detect_spikes(no_gap, 6.0).nas == 1

    def test_matches_oracle_on_random_series(self, rng):
        for _ in range(100):
            n = int(rng.integers(3, 60))
            x = rng.normal(0, 1, n)
            for pos in rng.integers(1, n - 1, size=rng.integers(0, 3)) if n > 2 else []:
                x[pos] += rng.choice([-1, 1]) * rng.uniform(5, 30)
            k = float(rng.uniform(2, 8))
            got = detect_spikes(series(list(x)), k)
            want = spike_oracle(list(x), k)
            assert [e[0] for e in got.events] == [10.0 * i for i in want]

    def test_count_bounded_by_interior_points(self, rng):
        for _ in range(30):
            n = int(rng.integers(3, 40))
            x = rng.normal(0, 1, n) * rng.choice([1, 100])
            rep = detect_spikes(series(list(x)), 2.0)
            assert rep.nas <= n - 2


class TestContinuousProfile:
    def test_constant(self):
        p = continuous_profile(series([2, 2, 2]))
        assert p.mean == 2.0 and p.std == 0.0
        assert p.skewness is None and p.excess_kurtosis is None

    def test_simple_sequence(self):
        p = continuous_profile(series([1, 2, 3, 4, 5]))
        assert (p.q1, p.median, p.q3) == (2.0, 3.0, 4.0)
        assert p.skewness == pytest.approx(0.0, abs=1e-12)

    def test_all_missing(self):
        p = continuous_profile(series([None, None]))
        assert p.cardinality == 0 and p.mean is None

    def test_ordering_invariant(self, rng):
        for _ in range(50):
            x = rng.normal(0, 10, int(rng.integers(1, 200)))
            p = continuous_profile(series(list(x)))
            assert p.minimum <= p.q1 <= p.median <= p.q3 <= p.maximum

    def test_moments_match_oracle(self, rng):
        for _ in range(50):
            x = list(rng.normal(5, 3, int(rng.integers(2, 300))))
            p = continuous_profile(series(x))
            mean, std, skew, kurt = moments_oracle(x)
            assert p.mean == pytest.approx(mean, rel=1e-9)
            assert p.std == pytest.approx(std, rel=1e-9)
            assert p.skewness == pytest.approx(skew, rel=1e-9, abs=1e-9)
            assert p.excess_kurtosis == pytest.approx(kurt, rel=1e-9, abs=1e-9)

    def test_symmetric_sample_has_zero_skew(self, rng):
        for _ in range(20):
            half = rng.normal(0, 2, 50)
            x = np.concatenate([half, -half])
            p = continuous_profile(series(list(x)))
            assert abs(p.skewness) < 1e-9


class TestCategoricalProfile:
    def test_mode(self):
        p = categorical_profile(cat_series(["a", "a", "b"]))
        assert (p.mode, p.mode_freq) == ("a", 2)
        assert p.mode_pct == pytest.approx(2 / 3)

    def test_tie_breaks_to_first_seen(self):
        p = categorical_profile(cat_series(["a", "b"]))
        assert p.mode == "a" and p.mode_pct == 0.5

    def test_bulk_counting(self, rng):
        bulk = ["on"] * 399 + ["off"] * 350 + ["idle"] * 250
        rng.shuffle(bulk)
        tokens = ["on"] + bulk  # first-seen order stays deterministic
        p = categorical_profile(cat_series(tokens))
        assert p.mode == "on" and p.mode_freq == 400
        assert p.mode_pct == pytest.approx(0.4)

    def test_all_missing(self):
        p = categorical_profile(cat_series([None, None]))
        assert p.mode is None and p.cardinality == 0


class TestDecompose:
    def test_constant_series(self):
        s = series([5.0] * 48)
        res = decompose(s, 12, "additive")
        ok = ~np.isnan(res.trend)
        assert np.allclose(res.seasonal[ok], 0.0, atol=1e-12)
        assert np.allclose(res.residual[ok], 0.0, atol=1e-12)

    def test_sine_amplitude_recovered(self):
        t = np.arange(24 * 20)
        x = 5.0 + np.sin(2 * np.pi * t / 24)
        res = decompose(series(list(x)), 24, "additive")
        phase = res.seasonal[:24]
        amp = (phase.max() - phase.min()) / 2
        assert amp == pytest.approx(1.0, rel=0.05)
        ok = ~np.isnan(res.trend)
        recon = res.trend[ok] + res.seasonal[ok] + res.residual[ok]
        assert np.allclose(recon, x[ok], rtol=1e-9)

    def test_pure_trend_has_no_seasonal(self):
        x = np.arange(120, dtype=float)
        res = decompose(series(list(x)), 12, "additive")
        assert np.nanmax(np.abs(res.seasonal)) < 1e-9

    def test_even_period_uses_symmetric_window(self):
        x = np.arange(40, dtype=float)
        res = decompose(series(list(x)), 4, "additive")
        ok = ~np.isnan(res.trend)
        # a linear ramp's centered average equals the ramp itself
        assert np.allclose(res.trend[ok], x[ok], rtol=1e-12)

    def test_multiplicative_reconstruction(self):
        t = np.arange(24 * 10)
        x = (10 + 0.01 * t) * (1.0 + 0.2 * np.sin(2 * np.pi * t / 24))
        res = decompose(series(list(x)), 24, "multiplicative")
        ok = ~np.isnan(res.trend) & ~np.isnan(res.residual)
        recon = res.trend[ok] * res.seasonal[ok] * res.residual[ok]
        assert np.allclose(recon, x[ok], rtol=1e-9)

    def test_too_short_raises(self):
        with pytest.raises(DecompositionUnavailable):
            decompose(series([1.0] * 20), 12)

    def test_gappy_series_needs_contiguous_run(self):
        vals = ([1.0] * 10 + [None]) * 10
        with pytest.raises(DecompositionUnavailable):
            decompose(series(vals), 12)


class TestDetectSeasonality:
    def test_constant_is_not_seasonal(self):
        assert not detect_seasonality(series([3.0] * 100), (12, 24), 0.05).seasonal

    def test_sine_is_seasonal(self):
        t = np.arange(24 * 30)
        x = 5 + np.sin(2 * np.pi * t / 24)
        res = detect_seasonality(series(list(x)), (12, 24, 96), 0.05)
        assert res.seasonal

    def test_white_noise_is_not_seasonal(self, rng):
        x = rng.normal(0, 1, 4000)
        assert not detect_seasonality(series(list(x)), (12, 24, 96), 0.05).seasonal

    def test_undecomposable_is_low_confidence_no(self):
        res = detect_seasonality(series([1.0, 2.0, 1.5]), (12,), 0.05)
        assert not res.seasonal and res.low_confidence


class TestAutocorrelation:
    def test_lag_zero_is_one(self, rng):
        x = list(rng.normal(0, 1, 50))
        acf = autocorrelation(series(x), 5)
        assert acf[0] == 1.0

    def test_alternating_series(self):
        x = [1.0, -1.0] * 50
        acf = autocorrelation(series(x), 3)
        assert acf[1] == pytest.approx(-1.0, abs=0.02)

    def test_white_noise_is_small(self):
        x = list(np.random.default_rng(7).normal(0, 1, 10_000))
        acf = autocorrelation(series(x), 10)
        assert np.all(np.abs(acf[1:]) < 0.05)

    def test_constant_undefined(self):
        assert autocorrelation(series([2, 2, 2]), 3) is None

    def test_matches_oracle_with_gaps(self, rng):
        for _ in range(30):
            n = int(rng.integers(10, 120))
            vals = [None if rng.random() < 0.2 else float(v) for v in rng.normal(0, 1, n)]
            if all(v is None for v in vals):
                continue
            want = acf_oracle(vals, 6)
            got = autocorrelation(series(vals), 6)
            if want is None:
                assert got is None
                continue
            assert got == pytest.approx(want, rel=1e-9, abs=1e-9)

    def test_bounded_for_gap_free(self, rng):
        for _ in range(20):
            x = list(rng.normal(0, 1, int(rng.integers(5, 100))))
            acf = autocorrelation(series(x), 8)
            assert np.all(np.abs(acf) <= 1.0 + 1e-9)


class TestDetectOutliers:
    def test_hand_case(self):
        rep = detect_outliers(series([1, 2, 3, 4, 100]), 1.5)
        assert (rep.q1, rep.q3) == (2.0, 4.0)
        assert rep.upper == 7.0
        assert rep.indices == [4]
        assert rep.rate == pytest.approx(0.2)

    def test_all_equal(self):
        rep = detect_outliers(series([5, 5, 5, 5, 5]), 1.5)
        assert rep.iqr == 0.0 and rep.rate == 0.0
        assert rep.lower == rep.upper == 5.0

    def test_undefined_below_four_values(self):
        assert not detect_outliers(series([1, 2, 3]), 1.5).defined

    def test_physical_bounds_limit_detections(self):
        vals = [10, 11, 12, 13, 40]
        base = detect_outliers(series(vals), 1.5)
        assert base.indices == [4]
        widened = detect_outliers(series(vals), 1.5, bounds=(0.0, 50.0))
        assert widened.indices == []

    def test_matches_exhaustive_scan(self, rng):
        for _ in range(100):
            n = int(rng.integers(4, 500))
            x = list(rng.normal(0, 5, n))
            for pos in rng.integers(0, n, size=rng.integers(0, 4)):
                x[pos] *= 50
            c = float(rng.choice([1.0, 1.5, 3.0]))
            rep = detect_outliers(series(x), c)
            want, lower, upper = outlier_oracle(x, c)
            assert rep.indices == want
            assert rep.lower == pytest.approx(lower, rel=1e-12)
            assert rep.upper == pytest.approx(upper, rel=1e-12)

    def test_indices_skip_missing_positions(self):
        rep = detect_outliers(series([None, 1, 2, 3, 4, 100]), 1.5)
        assert rep.indices == [5]
