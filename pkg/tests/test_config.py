"""Config serialization, hashing, validation, bundled assets."""

from dataclasses import replace

import pytest

from ceac_lab.config import (
    ArmCondition,
    TaskRef,
    TrialConfig,
    bundled_speed_script,
    config_from_dict,
    config_hash,
    config_to_dict,
    load_config,
    save_config,
)
from ceac_lab.control import ControlMode, ControllerParams
from ceac_lab.pilot import TrunkScript
from ceac_lab.tasks import TaskKind
from importlib import resources


class TestSerialization:
    def test_roundtrip(self, tmp_path):
        cfg = TrialConfig(
            controller=ControllerParams(mode=ControlMode.CCC, deadzone_zeta=1.5),
            arm_condition=ArmCondition.PROSTHESIS_CCC,
            script=TrunkScript(waypoints=((0.0, 1.0), (2.0, 5.0))),
            task=TaskRef(kind=TaskKind.LINE, length=0.25),
            seed=9,
            stance_lean=4.0,
            calibration_angle=4.0,
        )
        path = tmp_path / "cfg.json"
        save_config(cfg, path)
        back = load_config(path)
        assert back == cfg
        assert config_hash(back) == config_hash(cfg)

    def test_hash_sensitivity(self):
        a = TrialConfig()
        b = replace(a, seed=a.seed + 1)
        c = replace(a, controller=replace(a.controller, deadzone_zeta=3.0))
        assert config_hash(a) != config_hash(b)
        assert config_hash(a) != config_hash(c)
        assert config_hash(a) == config_hash(TrialConfig())

    def test_schema_version_gated(self):
        d = config_to_dict(TrialConfig())
        d["schema_version"] = 7
        with pytest.raises(ValueError, match="schema_version"):
            config_from_dict(d)


class TestValidation:
    def test_dt_vs_sample_rate(self):
        with pytest.raises(ValueError):
            TrialConfig(dt_sim=0.05, sample_rate=60.0)

    def test_mode_condition_consistency(self):
        with pytest.raises(ValueError, match="requires controller mode"):
            TrialConfig(
                controller=ControllerParams(mode=ControlMode.CEAC),
                arm_condition=ArmCondition.PROSTHESIS_CCC,
            )

    def test_snapped_dt_divides_sample_period(self):
        cfg = TrialConfig(dt_sim=0.001, sample_rate=60.0)
        dt = cfg.snapped_dt()
        n = cfg.substeps_per_sample()
        assert n * dt == pytest.approx(1.0 / 60.0, abs=1e-15)
        assert dt == pytest.approx(0.001, rel=0.05)


class TestBundledAssets:
    def test_speed_scripts_load(self):
        durations = []
        for i in range(1, 6):
            script = bundled_speed_script(i)
            assert len(script.waypoints) >= 3
            durations.append(script.duration)
        assert durations == sorted(durations, reverse=True)

    def test_speed_script_index_range(self):
        with pytest.raises(ValueError):
            bundled_speed_script(0)

    def test_bundled_configs_load(self):
        names = [
            "line_ceac",
            "line_ccc",
            "line_natural",
            "racetrack_large_medium_ceac",
            "reaching_ceac",
            "reaching_natural",
        ]
        for name in names:
            cfg = load_config(resources.files("ceac_lab.data") / "configs" / f"{name}.json")
            assert isinstance(cfg, TrialConfig)

    def test_line_acceptance_pair_share_pilot_and_scene(self):
        ceac = load_config(resources.files("ceac_lab.data") / "configs" / "line_ceac.json")
        ccc = load_config(resources.files("ceac_lab.data") / "configs" / "line_ccc.json")
        assert ceac.pilot == ccc.pilot
        assert ceac.stance_lean == ccc.stance_lean
        assert ceac.line_start_y == ccc.line_start_y
        assert ceac.task == ccc.task
        # CEAC anchors its freeze at true upright; CCC holds its stance
        assert ceac.calibration_angle == 0.0
        assert ccc.calibration_angle == ccc.stance_lean
