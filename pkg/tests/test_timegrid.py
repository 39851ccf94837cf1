from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import series
from sensorprofiler.timegrid import (
    align_to_grid,
    build_grid,
    default_grid,
    detect_duplicates,
    interval_analysis,
    resolve_duplicates,
)
from sensorprofiler.types import ConfigError, TimedSeries


def dup_series(rows):
    ts = np.array([r[0] for r in rows], float)
    vals = np.array([np.nan if r[1] is None else r[1] for r in rows], float)
    return TimedSeries(ts, vals)


class TestDetectDuplicates:
    def test_same_value_group(self):
        rep = detect_duplicates(dup_series([(1, 5), (1, 5), (2, 7)]))
        assert (rep.dts, rep.dtd) == (1, 0)
        assert rep.groups[0].rows == [0, 1]
        assert rep.groups[0].same_value

    def test_different_value_group(self):
        rep = detect_duplicates(dup_series([(1, 5), (1, 6)]))
        assert (rep.dts, rep.dtd) == (0, 1)

    def test_group_count_invariant(self):
        rep = detect_duplicates(dup_series([(1, 5), (1, 5), (2, 1), (2, 2), (3, 9)]))
        assert rep.dts + rep.dtd == len(rep.groups)
        assert all(len(g.rows) >= 2 for g in rep.groups)

    def test_missing_in_group_ignored_for_equality(self):
        rep = detect_duplicates(dup_series([(1, 5), (1, None), (1, 5)]))
        assert (rep.dts, rep.dtd) == (1, 0)


class TestResolveDuplicates:
    def test_dts_identity(self):
        out = resolve_duplicates(dup_series([(1, 5), (1, 5)]), "mean")
        assert out.values.tolist() == [5.0]

    def test_dtd_mean(self):
        out = resolve_duplicates(dup_series([(1, 4), (1, 8)]), "mean")
        assert out.values.tolist() == [6.0]

    def test_dtd_median(self):
        # brute-force median of the group
        assert float(np.median([1, 2, 9])) == 2.0
        out = resolve_duplicates(dup_series([(1, 1), (1, 2), (1, 9)]), "median")
        assert out.values.tolist() == [2.0]

    def test_all_missing_group_collapses_to_missing(self):
        out = resolve_duplicates(dup_series([(1, None), (1, None), (2, 3)]), "median")
        assert np.isnan(out.values[0]) and out.values[1] == 3.0

    def test_categorical_takes_first(self):
        s = TimedSeries(np.array([1.0, 1.0]), np.array([0.0, 1.0]), "categorical", ("a", "b"))
        out = resolve_duplicates(s, "median")
        assert out.values.tolist() == [0.0]

    def test_strictly_increasing_and_no_duplicates_after(self):
        s = dup_series([(1, 5), (1, 6), (2, 7), (3, 1), (3, 1)])
        out = resolve_duplicates(s, "median")
        assert np.all(np.diff(out.timestamps) > 0)
        rep = detect_duplicates(out)
        assert (rep.dts, rep.dtd) == (0, 0)

    @given(
        st.lists(
            st.tuples(st.integers(0, 8), st.floats(-100, 100)), min_size=1, max_size=40
        ),
        st.sampled_from(["first", "mean", "median"]),
    )
    @settings(max_examples=200, deadline=None)
    def test_idempotent(self, rows, policy):
        rows.sort(key=lambda r: r[0])
        s = dup_series(rows)
        once = resolve_duplicates(s, policy)
        twice = resolve_duplicates(once, policy)
        assert np.array_equal(once.timestamps, twice.timestamps)
        assert np.array_equal(once.values, twice.values, equal_nan=True)


class TestIntervalAnalysis:
    def test_perfect_lattice(self):
        rep = interval_analysis(series([1, 2, 3, 4], interval=10.0), 10.0, 0.0)
        assert rep.pti == 1.0
        assert rep.total_intervals == 3

    def test_hand_enumerated(self):
        s = TimedSeries(np.array([0.0, 10.0, 25.0, 35.0]), np.zeros(4))
        rep = interval_analysis(s, 10.0, 0.0)
        assert rep.pti == pytest.approx(2 / 3)
        assert rep.irregular_positions == [1]

    def test_short_series_undefined(self):
        rep = interval_analysis(series([1]), 10.0)
        assert rep.pti is None and not rep.defined

    def test_tolerance_window(self):
        s = TimedSeries(np.array([0.0, 10.5, 20.0]), np.zeros(3))
        assert interval_analysis(s, 10.0, 0.5).pti == 1.0
        assert interval_analysis(s, 10.0, 0.4).pti == 0.0

    def test_pti_one_iff_all_normal(self, rng):
        for _ in range(50):
            n = int(rng.integers(2, 40))
            gaps = rng.choice([10.0, 13.0], size=n - 1)
            ts = np.concatenate(([0.0], np.cumsum(gaps)))
            rep = interval_analysis(TimedSeries(ts, np.zeros(n)), 10.0, 0.0)
            assert 0.0 <= rep.pti <= 1.0
            assert (rep.pti == 1.0) == bool(np.all(gaps == 10.0))


class TestBuildGrid:
    def test_inclusive_cover(self):
        grid = build_grid(0.0, 30.0, 10.0)
        assert grid.slots == 4
        assert grid.timestamps().tolist() == [0.0, 10.0, 20.0, 30.0]

    def test_degenerate_range(self):
        assert build_grid(5.0, 5.0, 10.0).slots == 1

    def test_floor_rule(self):
        assert build_grid(0.0, 35.0, 10.0).timestamps().tolist() == [0.0, 10.0, 20.0, 30.0]

    def test_bad_interval(self):
        with pytest.raises(ConfigError):
            build_grid(0.0, 10.0, 0.0)

    def test_default_grid_rounds_outward(self):
        s = TimedSeries(np.array([12.0, 57.0]), np.zeros(2))
        grid = default_grid(s, 10.0)
        assert grid.start == 10.0 and grid.end == 60.0


class TestAlignToGrid:
    def test_nearest_assignment(self):
        s = TimedSeries(np.array([0.0, 10.4, 19.8]), np.array([1.0, 2.0, 3.0]))
        out, dropped = align_to_grid(s, build_grid(0.0, 20.0, 10.0), "mean")
        assert dropped == 0
        assert out.values.tolist() == [1.0, 2.0, 3.0]

    def test_idempotent_on_aligned(self):
        grid = build_grid(0.0, 40.0, 10.0)
        s = TimedSeries(grid.timestamps(), np.array([1, np.nan, 3, 4, np.nan]))
        out, dropped = align_to_grid(s, grid, "mean")
        assert dropped == 0
        assert np.array_equal(out.timestamps, s.timestamps)
        assert np.array_equal(out.values, s.values, equal_nan=True)

    def test_merge_by_mean(self):
        s = TimedSeries(np.array([9.6, 10.4]), np.array([1.0, 3.0]))
        out, _ = align_to_grid(s, build_grid(0.0, 20.0, 10.0), "mean")
        assert np.isnan(out.values[0]) and np.isnan(out.values[2])
        assert out.values[1] == 2.0

    def test_midpoint_tie_goes_to_earlier_slot(self):
        s = TimedSeries(np.array([5.0]), np.array([7.0]))
        out, _ = align_to_grid(s, build_grid(0.0, 10.0, 10.0), "mean")
        assert out.values[0] == 7.0 and np.isnan(out.values[1])

    def test_out_of_range_dropped_with_count(self):
        s = TimedSeries(np.array([-6.0, 0.0, 26.0]), np.array([1.0, 2.0, 3.0]))
        out, dropped = align_to_grid(s, build_grid(0.0, 20.0, 10.0), "mean")
        assert dropped == 2
        assert out.values.tolist()[0] == 2.0

    def test_merge_by_median_and_first(self):
        s = TimedSeries(np.array([9.6, 10.0, 10.4]), np.array([1.0, 9.0, 2.0]))
        grid = build_grid(0.0, 20.0, 10.0)
        assert align_to_grid(s, grid, "median")[0].values[1] == 2.0
        assert align_to_grid(s, grid, "first")[0].values[1] == 1.0

    @given(
        st.lists(st.floats(-5, 45), min_size=1, max_size=60),
        st.sampled_from(["first", "mean", "median"]),
    )
    @settings(max_examples=200, deadline=None)
    def test_conservation(self, instants, policy):
        instants.sort()
        s = TimedSeries(np.array(instants), np.arange(len(instants), dtype=float))
        grid = build_grid(0.0, 40.0, 10.0)
        out, dropped = align_to_grid(s, grid, policy)
        eps = 1e-9 * grid.interval
        in_range = [t for t in instants if -5.0 - eps <= t <= 45.0 + eps]
        assert len(in_range) + dropped == len(instants)
        assert np.all(np.diff(out.timestamps) > 0)
        assert np.array_equal(out.timestamps, grid.timestamps())
