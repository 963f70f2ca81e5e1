"""Trial configuration: serialization, validation, canonical hashing."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict
from enum import Enum

from .control import ControllerParams, ControlMode
from .kinematics import SegmentLengths
from .pilot import Interpolation, PilotMode, PilotPolicy, TrunkScript
from .tasks import SpeedInstruction, TaskKind, TrackScale

__all__ = [
    "ArmCondition",
    "TaskRef",
    "TrialConfig",
    "config_hash",
    "load_config",
    "save_config",
    "PROSTHESIS_MOUNT_OFFSET",
    "CARROT_SPEEDS",
]

CONFIG_SCHEMA_VERSION = 1
PROSTHESIS_MOUNT_OFFSET = 35.0  # deg, prosthetic forearm mounting angle
DEFAULT_TABLE_Z = 0.10  # m, drawing table height above the hip
DEFAULT_LINE_START_Y = 0.15  # m, line point A forward of the hip

# instructed-speed pacing of the path carrot, m/s
CARROT_SPEEDS = {
    SpeedInstruction.SLOW: 0.04,
    SpeedInstruction.MEDIUM: 0.08,
    SpeedInstruction.FAST: 0.16,
}


class ArmCondition(str, Enum):
    PROSTHESIS_CEAC = "prosthesis_ceac"
    PROSTHESIS_CCC = "prosthesis_ccc"
    NATURAL = "natural"


@dataclass(frozen=True)
class TaskRef:
    """Names which task to build (plus its variant knobs)."""

    kind: TaskKind = TaskKind.LINE
    length: float = 0.20
    scale: TrackScale | None = None
    speed_instruction: SpeedInstruction | None = None
    geometry_file: str | None = None  # external task file overriding the bundled one


@dataclass(frozen=True)
class TrialConfig:
    """Everything one trial needs; hashable to a stable config id."""

    controller: ControllerParams = field(default_factory=ControllerParams)
    lengths: SegmentLengths = field(default_factory=SegmentLengths)
    pilot: PilotPolicy = field(default_factory=PilotPolicy)
    script: TrunkScript | None = None
    task: TaskRef = field(default_factory=TaskRef)
    arm_condition: ArmCondition = ArmCondition.PROSTHESIS_CEAC
    sample_rate: float = 60.0
    dt_sim: float = 0.001
    seed: int = 0
    table_z: float = DEFAULT_TABLE_Z
    line_start_y: float = DEFAULT_LINE_START_Y
    stance_lean: float = 0.0  # deg, working trunk posture at trial start
    calibration_angle: float = 0.0  # deg, posture captured as the freeze anchor
    carrot_speed: float | None = None  # m/s; None derives from speed_instruction
    max_duration: float | None = None  # s; None derives from the task
    settle_tail: float = 1.0  # s of logging kept after task completion

    def __post_init__(self):
        if not (self.sample_rate > 0.0):
            raise ValueError("sample_rate must be > 0")
        if not (0.0 < self.dt_sim <= 1.0 / self.sample_rate):
            raise ValueError("dt_sim must be in (0, 1/sample_rate]")
        if self.arm_condition is not ArmCondition.NATURAL:
            wanted = (
                ControlMode.CCC
                if self.arm_condition is ArmCondition.PROSTHESIS_CCC
                else ControlMode.CEAC
            )
            if self.controller.mode is not wanted:
                raise ValueError(
                    f"arm_condition {self.arm_condition.value} requires controller mode "
                    f"{wanted.value}, got {self.controller.mode.value}"
                )

    def snapped_dt(self) -> float:
        """dt_sim snapped so an integel number of substeps spans one sample."""
        period = 1.0 / self.sample_rate
        n = max(1, round(period / self.dt_sim))
        return period / n

    def substeps_per_sample(self) -> int:
        return max(1, round((1.0 / self.sample_rate) / self.dt_sim))


def _to_jsonable(cfg: TrialConfig) -> dict:
    d = asdict(cfg)
    d["schema_version"] = CONFIG_SCHEMA_VERSION
    d["controller"]["mode"] = cfg.controller.mode.value
    d["arm_condition"] = cfg.arm_condition.value
    d["task"]["kind"] = cfg.task.kind.value
    d["task"]["scale"] = cfg.task.scale.value if cfg.task.scale else None
    d["task"]["speed_instruction"] = (
        cfg.task.speed_instruction.value if cfg.task.speed_instruction else None
    )
    d["pilot"]["mode"] = cfg.pilot.mode.value
    if cfg.script is not None:
        d["script"] = {
            "waypoints": [[t, a] for t, a in cfg.script.waypoints],
            "interpolation": cfg.script.interpolation.value,
        }
    return d


def _from_jsonable(d: dict) -> TrialConfig:
    version = d.get("schema_version", CONFIG_SCHEMA_VERSION)
    if version != CONFIG_SCHEMA_VERSION:
        raise ValueError(
            f"config schema_version {version!r} not supported (expected {CONFIG_SCHEMA_VERSION})"
        )
    c = d["controller"]
    controller = ControllerParams(
        deadzone_zeta=c["deadzone_zeta"],
        cutoff_fc=c["cutoff_fc"],
        gain_lambda=c["gain_lambda"],
        ref_initial=c["ref_initial"],
        omega_max=c["omega_max"],
        mode=ControlMode(c["mode"]),
        freeze_inverted=c.get("freeze_inverted", False),
    )
    lengths = SegmentLengths(**d["lengths"])
    p = d["pilot"]
    pilot = PilotPolicy(
        mode=PilotMode(p["mode"]),
        pen_gain=p["pen_gain"],
        trunk_rate_max=p["trunk_rate_max"],
        reaction_delay=p["reaction_delay"],
    )
    script = None
    if d.get("script") is not None:
        s = d["script"]
        script = TrunkScript(
            waypoints=tuple((float(t), float(a)) for t, a in s["waypoints"]),
            interpolation=Interpolation(s["interpolation"]),
        )
    t = d["task"]
    task = TaskRef(
        kind=TaskKind(t["kind"]),
        length=t.get("length", 0.20),
        scale=TrackScale(t["scale"]) if t.get("scale") else None,
        speed_instruction=(
            SpeedInstruction(t["speed_instruction"]) if t.get("speed_instruction") else None
        ),
        geometry_file=t.get("geometry_file"),
    )
    return TrialConfig(
        controller=controller,
        lengths=lengths,
        pilot=pilot,
        script=script,
        task=task,
        arm_condition=ArmCondition(d["arm_condition"]),
        sample_rate=d.get("sample_rate", 60.0),
        dt_sim=d.get("dt_sim", 0.001),
        seed=d.get("seed", 0),
        table_z=d.get("table_z", DEFAULT_TABLE_Z),
        line_start_y=d.get("line_start_y", DEFAULT_LINE_START_Y),
        stance_lean=d.get("stance_lean", 0.0),
        calibration_angle=d.get("calibration_angle", 0.0),
        carrot_speed=d.get("carrot_speed"),
        max_duration=d.get("max_duration"),
        settle_tail=d.get("settle_tail", 1.0),
    )


def config_hash(cfg: TrialConfig) -> str:
    """Stable 12-hex-digit id from the canonical JSON serialization."""
    canonical = json.dumps(_to_jsonable(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def save_config(cfg: TrialConfig, path) -> None:
    with open(path, "w") as fh:
        json.dump(_to_jsonable(cfg), fh, indent=2, sort_keys=True)


def load_config(path) -> TrialConfig:
    with open(path) as fh:
        return _from_jsonable(json.load(fh))


def config_to_dict(cfg: TrialConfig) -> dict:
    return _to_jsonable(cfg)


def config_from_dict(d: dict) -> TrialConfig:
    return _from_jsonable(d)


def load_script(path) -> TrunkScript:
    """Load a trunk script file (bundled speed regimes use this format)."""
    with open(path) as fh:
        payload = json.load(fh)
    version = payload.get("schema_version")
    if version != CONFIG_SCHEMA_VERSION:
        raise ValueError(
            f"script schema_version {version!r} not supported (expected {CONFIG_SCHEMA_VERSION})"
        )
    return TrunkScript(
        waypoints=tuple((float(t), float(a)) for t, a in payload["waypoints"]),
        interpolation=Interpolation(payload.get("interpolation", "minimum_jerk")),
    )


def bundled_speed_script(index: int) -> TrunkScript:
    """One of the five bundled speed-regime trunk scripts (1 = slowest)."""
    from importlib import resources

    if not 1 <= index <= 5:
        raise ValueError("speed scripts are numbered 1..5")
    return load_script(resources.files("ceac_lab.data") / "scripts" / f"speed_{index}.json")
