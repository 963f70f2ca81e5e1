"""Movement-quality metrics against their independent oracles."""

import math

import numpy as np
import pytest

from ceac_lab.metrics import (
    MetricReport,
    completion_time,
    path_length_ratio,
    precision_score,
    range_of_motion,
    report_csv_header,
    report_csv_row,
    sjvi,
    sparc,
    total_movement,
)
from ceac_lab.signals import TimeSeries
from oracles import precision_dense, sparc_dft


def minimum_jerk_speed(duration, rate, amplitude=1.0):
    """Bell-shaped tangential speed of one minimum-jerk stroke."""
    n = int(duration * rate)
    s = np.arange(n) / max(n - 1, 1)
    return amplitude * 30.0 * s**2 * (1.0 - s) ** 2


class TestPrecisionScore:
    def test_identical_curves(self):
        ref = np.array([[0.0, 0.0], [0.2, 0.0]])
        drawn = np.column_stack([np.linspace(0, 0.2, 50), np.zeros(50)])
        assert precision_score(drawn, ref) == pytest.approx(0.0, abs=1e-12)

    def test_constant_offset(self):
        # parallel 2 mm offset over the interior of a long straight reference
        ref = np.array([[-1.0, 0.0], [1.0, 0.0]])
        drawn = np.column_stack([np.linspace(0.0, 0.2, 80), np.full(80, 0.002)])
        assert precision_score(drawn, ref) == pytest.approx(2.0, rel=0.01)

    def test_wiggly_curve_against_dense_oracle(self):
        rng = np.random.default_rng(6)
        x = np.linspace(0.0, 0.3, 120)
        y = 0.003 * np.sin(40 * x) + 0.001 * rng.normal(size=len(x))
        drawn = np.column_stack([x, y])
        ref = np.array([[0.0, 0.0], [0.15, 0.004], [0.3, 0.0]])
        ours = precision_score(drawn, ref)
        oracle = precision_dense(drawn, ref, step_mm=0.01)
        assert ours == pytest.approx(oracle, rel=0.02)

    def test_empty_trace_rejected(self):
        ref = np.array([[0.0, 0.0], [1.0, 0.0]])
        with pytest.raises(ValueError):
            precision_score(np.zeros((1, 2)), ref)
        with pytest.raises(ValueError):
            precision_score(np.array([[0.1, 0.1], [0.1, 0.1]]), ref)


class TestPathLengthRatio:
    def test_straight_line(self):
        p = np.column_stack([np.linspace(0, 1, 30), np.zeros(30)])
        assert path_length_ratio(p) == pytest.approx(1.0, abs=1e-12)

    def test_right_angle(self):
        p = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
        assert path_length_ratio(p) == pytest.approx(2.0 / math.sqrt(2.0), abs=1e-6)

    def test_semicircle(self):
        theta = np.linspace(0, math.pi, 2000)
        p = np.column_stack([np.cos(theta), np.sin(theta)])
        assert path_length_ratio(p) == pytest.approx(math.pi / 2.0, rel=1e-5)

    def test_closed_path_rejected(self):
        p = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]])
        with pytest.raises(ValueError):
            path_length_ratio(p)

    def test_scale_invariance(self):
        rng = np.random.default_rng(12)
        p = rng.normal(size=(40, 2)).cumsum(axis=0)
        r1 = path_length_ratio(p)
        r2 = path_length_ratio(137.0 * p)
        assert r1 == pytest.approx(r2, abs=1e-12)


class TestSparc:
    def test_single_minimum_jerk_matches_oracle(self):
        speed = minimum_jerk_speed(1.0, 60.0)
        series = TimeSeries.from_values(speed, 60.0)
        ours = sparc(series)
        oracle = sparc_dft(speed, 60.0)
        assert ours == pytest.approx(oracle, abs=1e-6)
        assert ours < 0

    def test_oracle_agreement_on_randomized_profiles(self):
        rng = np.random.default_rng(77)
        for _ in range(20):
            n_moves = rng.integers(1, 4)
            pieces = []
            for _ in range(n_moves):
                pieces.append(minimum_jerk_speed(rng.uniform(0.5, 1.5), 60.0, rng.uniform(0.5, 2.0)))
                pieces.append(np.zeros(rng.integers(0, 30)))
            speed = np.concatenate(pieces)
            speed = speed + rng.uniform(0.0, 0.02) * rng.random(len(speed))
            if len(speed) < 32:
                continue
            series = TimeSeries.from_values(speed, 60.0)
            assert sparc(series) == pytest.approx(sparc_dft(speed, 60.0), abs=1e-6)

    def test_pause_makes_sparc_more_negative(self):
        single = minimum_jerk_speed(1.0, 60.0)
        pause = np.zeros(30)
        double = np.concatenate([single, pause, single])
        s_single = sparc(TimeSeries.from_values(single, 60.0))
        s_double = sparc(TimeSeries.from_values(double, 60.0))
        assert s_double < s_single

    def test_time_rescaling_tracks_oracle(self):
        for duration in (1.0, 2.0, 4.0):
            speed = minimum_jerk_speed(duration, 60.0)
            ours = sparc(TimeSeries.from_values(speed, 60.0))
            assert ours == pytest.approx(sparc_dft(speed, 60.0), abs=1e-6)

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            sparc(TimeSeries.from_values(np.ones(16), 60.0))

    def test_constant_profile_rejected(self):
        with pytest.raises(ValueError):
            sparc(TimeSeries.from_values(np.zeros(64), 60.0))
        with pytest.raises(ValueError):
            sparc(TimeSeries.from_values(np.full(64, 2.0), 60.0))


class TestRomAndTotalMovement:
    def test_sinusoid(self):
        rate, cycles, amp = 600.0, 3, 7.0
        t = np.arange(int(cycles * rate)) / rate
        angles = amp * np.sin(2 * math.pi * t)
        series = TimeSeries(t=t, values=angles, rate=rate)
        assert range_of_motion(series) == pytest.approx(2 * amp, rel=5e-3)
        assert total_movement(series) == pytest.approx(4 * amp * cycles, rel=5e-3)

    def test_monotone_ramp_equality(self):
        series = TimeSeries.from_values(np.linspace(0, 33.0, 100), 60.0)
        assert total_movement(series) == pytest.approx(range_of_motion(series), abs=1e-12)

    def test_constant(self):
        series = TimeSeries.from_values(np.full(50, 4.0), 60.0)
        assert range_of_motion(series) == 0.0
        assert total_movement(series) == 0.0

    def test_total_at_least_rom(self):
        rng = np.random.default_rng(19)
        for _ in range(20):
            series = TimeSeries.from_values(rng.normal(size=60).cumsum(), 60.0)
            assert total_movement(series) >= range_of_motion(series) - 1e-12


class TestSjvi:
    def series(self, values, rate=60.0):
        return TimeSeries.from_values(np.asarray(values, dtype=float), rate)

    def test_both_constantly_active(self):
        n = 600
        elbow = self.series(np.full(n, 2.0))
        shoulder = self.series(np.full(n, 2.0))
        assert sjvi(elbow, shoulder, [(0.0, 10.0)]) == 1.0

    def test_elbow_silent(self):
        n = 600
        elbow = self.series(np.zeros(n))
        shoulder = self.series(np.full(n, 5.0))
        assert sjvi(elbow, shoulder, [(0.0, 10.0)]) == 0.0

    def test_disjoint_activity(self):
        n = 600
        half = n // 2
        elbow = self.series(np.concatenate([np.full(half, 3.0), np.zeros(n - half)]))
        shoulder = self.series(np.concatenate([np.zeros(half), np.full(n - half, 3.0)]))
        # active in disjoint halves of the scored span: never co-active
        assert sjvi(elbow, shoulder, [(0.0, 7.0)]) == 0.0

    def test_threshold_scaling_invariance(self):
        rng = np.random.default_rng(3)
        n = 600
        base = 1.5 + np.abs(rng.normal(1.0, 0.3, n))  # all samples active
        elbow = self.series(base)
        shoulder = self.series(base[::-1].copy())
        v1 = sjvi(elbow, shoulder, [(0.0, 8.0)])
        v2 = sjvi(self.series(3.0 * base), self.series(3.0 * base[::-1].copy()), [(0.0, 8.0)])
        assert v1 == v2 == 1.0

    def test_short_phase_skipped_with_warning(self):
        n = 600
        elbow = self.series(np.full(n, 2.0))
        shoulder = self.series(np.full(n, 2.0))
        with pytest.warns(UserWarning):
            value = sjvi(elbow, shoulder, [(0.0, 1.5), (2.0, 8.0)])
        assert value == 1.0

    def test_bounds(self):
        rng = np.random.default_rng(5)
        n = 600
        elbow = self.series(rng.normal(0, 2, n))
        shoulder = self.series(rng.normal(0, 2, n))
        v = sjvi(elbow, shoulder, [(0.0, 4.0), (4.0, 9.0)])
        assert 0.0 <= v <= 1.0

    def test_errors(self):
        with pytest.raises(ValueError):
            sjvi(self.series(np.zeros(10)), self.series(np.zeros(11)), [(0.0, 1.0)])
        with pytest.raises(ValueError):
            sjvi(self.series(np.zeros(10)), self.series(np.zeros(10)), [])


class _LogStub:
    def __init__(self, summary, events=()):
        self.summary = summary
        self.events = list(events)


class TestCompletionTime:
    def test_known_crossing_timestamps(self):
        log = _LogStub(
            {"completed": True, "started_at": 1.25, "ended_at": 7.75},
            events=[(1.25, "task_started"), (7.75, "task_ended")],
        )
        assert completion_time(log) == pytest.approx(6.5)

    def test_reaching_final_dwell_entry_fixture(self):
        # first cue at 0.1 s, final successful dwell entered at t = 40.0 s
        log = _LogStub(
            {"completed": True, "started_at": 0.1, "ended_at": 40.0,
             "acquisitions": [[9, 40.0, 42.0]]},
        )
        assert completion_time(log) == pytest.approx(39.9)

    def test_incomplete_trial_has_no_time(self):
        log = _LogStub({"completed": False, "started_at": 0.5, "ended_at": None})
        assert completion_time(log) is None

    def test_missing_markers_rejected(self):
        with pytest.raises(ValueError, match="progress markers"):
            completion_time(_LogStub({}))


class TestReportSerialization:
    def test_csv_row_roundtrip_fields(self):
        report = MetricReport(
            task_kind="line",
            completed=True,
            completion_time=4.5,
            precision_mm=1.25,
            sparc=-42.0,
            rom_trunk=10.0,
            rom_shoulder=20.0,
            rom_elbow=30.0,
            total_trunk=15.0,
            total_shoulder=25.0,
            total_elbow=35.0,
        )
        header = report_csv_header().split(",")
        row = report_csv_row(report).split(",")
        assert len(header) == len(row)
        d = dict(zip(header, row))
        assert d["completion_time"] == repr(4.5)
        assert d["plr"] == ""  # not applicable to drawing
        assert "sjvi" in d
