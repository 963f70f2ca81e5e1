"""Trial engine and sweeps: determinism, modes, logging, reports."""

import numpy as np
import pytest

from ceac_lab.config import ArmCondition, TaskRef, TrialConfig, config_hash
from ceac_lab.control import ControlMode, ControllerParams
from ceac_lab.pilot import PilotMode, PilotPolicy, TrunkScript
from ceac_lab.tasks import SpeedInstruction, TaskKind
from ceac_lab.trial import (
    SimulationDiverged,
    TrialEngine,
    build_task,
    compute_report,
    run_sweep,
    run_trial,
)


def line_config(**kw):
    base = dict(
        controller=ControllerParams(mode=ControlMode.CEAC),
        arm_condition=ArmCondition.PROSTHESIS_CEAC,
        pilot=PilotPolicy(pen_gain=400.0, trunk_rate_max=10.0, reaction_delay=0.10),
        task=TaskRef(kind=TaskKind.LINE, length=0.20),
        line_start_y=0.20,
        stance_lean=8.0,
        calibration_angle=0.0,
        seed=1,
        max_duration=30.0,
    )
    base.update(kw)
    return TrialConfig(**base)


class TestRunTrial:
    def test_natural_mode_never_commands_the_motor(self):
        cfg = line_config(
            arm_condition=ArmCondition.NATURAL,
            pilot=PilotPolicy(mode=PilotMode.NATURAL_LIMB, pen_gain=400.0, trunk_rate_max=10.0, reaction_delay=0.10),
        )
        log = run_trial(cfg)
        assert np.all(log.columns["omega_cmd"] == 0.0)
        assert not log.columns["motor_active"].any()
        assert log.columns["beta"].std() > 0  # elbow still moves, via IK

    def test_log_structure(self):
        cfg = line_config()
        log = run_trial(cfg)
        assert log.header["config_hash"] == config_hash(cfg)
        t = log.columns["t"]
        assert np.allclose(np.diff(t), 1.0 / cfg.sample_rate, atol=1e-9)
        assert log.summary["task_kind"] == "line"
        assert ("task_started" in (name for _, name in log.events))

    def test_rerun_bit_identical(self):
        cfg = line_config()
        a = run_trial(cfg).to_csv()
        b = run_trial(cfg).to_csv()
        assert a == b

    def test_divergence_guard(self):
        engine = TrialEngine(line_config(arm_condition=ArmCondition.NATURAL,
                                         pilot=PilotPolicy(mode=PilotMode.NATURAL_LIMB)))
        with pytest.raises((SimulationDiverged, ValueError)):
            for _ in range(engine.n_sub + 1):
                engine.substep(float("nan"))

    def test_elbow_limit_events_counted(self):
        # a violent scripted lean drives the elbow into its limit
        script = TrunkScript(waypoints=((0.0, 8.0), (0.6, 38.0), (3.0, 38.0)))
        cfg = line_config(script=script, max_duration=4.0)
        log = run_trial(cfg)
        assert log.summary["n_limit_events"] >= 1
        assert log.columns["beta"].min() >= 0.0

    def test_scripted_zero_elbow_regime(self):
        from ceac_lab.config import bundled_speed_script

        cfg = line_config(script=bundled_speed_script(1))
        log = run_trial(cfg)
        assert np.all(log.columns["omega_cmd"] == 0.0)
        assert log.columns["beta"].max() == log.columns["beta"].min()

    def test_report_on_completed_line_trial(self):
        cfg = line_config()
        log = run_trial(cfg)
        task = build_task(cfg.task, cfg.table_z, cfg.line_start_y)
        report = compute_report(log, task)
        assert report.completed
        assert report.completion_time > 0
        assert report.precision_mm is not None and report.precision_mm < 10.0
        assert report.sparc is not None and report.sparc < 0
        assert report.plr is None and report.sjvi is None  # reaching-only metrics


@pytest.fixture(scope="module")
def reaching_reports():
    reports = {}
    for arm in (ArmCondition.PROSTHESIS_CEAC, ArmCondition.NATURAL):
        cfg = TrialConfig(
            controller=ControllerParams(mode=ControlMode.CEAC),
            arm_condition=arm,
            task=TaskRef(kind=TaskKind.REACHING),
            seed=5,
        )
        log = run_trial(cfg)
        reports[arm] = (log, compute_report(log, build_task(cfg.task, cfg.table_z, cfg.line_start_y)))
    return reports


class TestReachingTrial:
    def test_nine_phases_with_two_second_dwells(self, reaching_reports):
        log, report = reaching_reports[ArmCondition.PROSTHESIS_CEAC]
        acq = log.summary["acquisitions"]
        assert [k for k, _, _ in acq] == list(range(1, 10))
        for _, entry, acquired in acq:
            assert acquired - entry >= 2.0 - 1e-9
        assert report.plr is not None and report.plr >= 1.0
        assert report.sjvi is not None and 0.0 <= report.sjvi <= 1.0

    def test_prosthesis_vs_natural_orderings(self, reaching_reports):
        # expected qualitative contrasts: the prosthesis round is
        # slower, less direct, less smooth (more negative spectral arc
        # length), and less co-activated than the natural limb
        _, pros = reaching_reports[ArmCondition.PROSTHESIS_CEAC]
        _, nat = reaching_reports[ArmCondition.NATURAL]
        assert pros.completed and nat.completed
        assert pros.completion_time > nat.completion_time
        assert pros.plr > nat.plr
        assert pros.sparc < nat.sparc
        assert pros.sjvi < nat.sjvi
        assert pros.total_trunk > nat.total_trunk


@pytest.fixture(scope="module")
def sweep_result():
    base = TrialConfig(
        controller=ControllerParams(mode=ControlMode.CEAC),
        arm_condition=ArmCondition.PROSTHESIS_CEAC,
        seed=2,
    )
    return run_sweep(base, repetitions=1)


class TestSweep:

    def test_grid_shape(self, sweep_result):
        assert len(sweep_result.cells) == 6  # 3 speeds x 2 scales x 1 rep
        labels = {c.label.rsplit("/rep", 1)[0] for c in sweep_result.cells}
        assert labels == {
            "large/slow", "large/medium", "large/fast",
            "small/slow", "small/medium", "small/fast",
        }

    def test_all_cells_completed(self, sweep_result):
        for cell in sweep_result.cells:
            assert cell.error is None, f"{cell.label}: {cell.error}"
            assert cell.report.completed, cell.label

    def test_faster_instruction_is_faster(self, sweep_result):
        by_label = {c.label: c.report for c in sweep_result.cells}
        for scale in ("large", "small"):
            slow = by_label[f"{scale}/slow/rep0"].completion_time
            fast = by_label[f"{scale}/fast/rep0"].completion_time
            assert fast < slow

    def test_aggregate_csv_shape(self, sweep_result):
        csv_text = sweep_result.aggregate_csv()
        lines = csv_text.strip().splitlines()
        assert len(lines) == 1 + 6
        assert lines[0].startswith("condition,n,")

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            run_sweep(TrialConfig(), repetitions=0)

    def test_cell_isolation(self, monkeypatch):
        import ceac_lab.trial as trial_mod

        calls = {"n": 0}
        real = trial_mod.run_trial

        def flaky(config):
            calls["n"] += 1
            if calls["n"] == 2:
                raise RuntimeError("injected failure")
            return real(config)

        monkeypatch.setattr(trial_mod, "run_trial", flaky)
        base = TrialConfig(seed=2)
        result = trial_mod.run_sweep(base, speeds=(SpeedInstruction.FAST,), scales=("small",), repetitions=2)
        errors = [c for c in result.cells if c.error is not None]
        oks = [c for c in result.cells if c.error is None]
        assert len(errors) == 1 and "injected failure" in errors[0].error
        assert len(oks) == 1
