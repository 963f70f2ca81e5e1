"""Trial orchestration: the fixed-step simulation loop and sweeps.

One substep is: trunk input -> controller step (prosthesis) or natural
2-link IK -> elbow integration (clamped at the joint range) -> shoulder
placement (rate-limited) -> forward kinematics -> task evaluation and
logging at the sample rate.

The same engine advances offline trials (pilot-driven) and live
sessions (client-driven trunk samples), which is what makes replayed
sessions reproduce offline runs exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .config import (
    CARROT_SPEEDS,
    ArmCondition,
    PROSTHESIS_MOUNT_OFFSET,
    TaskRef,
    TrialConfig,
    config_hash,
    config_to_dict,
)
from .control import ControlCommand, make_initial_state, step_controller
from .kinematics import (
    BodyState,
    Plane,
    clamp_elbow,
    forward_kinematics,
    joint_positions,
)
from .logs import LOG_COLUMNS, TrialLog
from .metrics import (
    MetricReport,
    completion_time,
    precision_score,
    path_length_ratio,
    range_of_motion,
    sjvi,
    sparc,
    total_movement,
)
from .pilot import (
    PilotMode,
    ReleaseCatchPilot,
    natural_limb_ik,
    sample_trunk,
    shoulder_compensate,
)
from .signals import TimeSeries, butterworth_coeffs, differentiate, filtfilt
from .tasks import (
    SCREEN_Y,
    SpeedInstruction,
    TaskKind,
    TaskProgress,
    TaskSpec,
    TrackScale,
    evaluate_sample,
    line_task,
    load_task_file,
    racetrack_task,
    reaching_task,
)

__all__ = [
    "SimulationDiverged",
    "TrialEngine",
    "run_trial",
    "run_sweep",
    "SweepResult",
    "compute_report",
    "filtered_channel",
    "build_task",
]

SHOULDER_RATE_MAX = 90.0  # deg/s, human shoulder servo bound
NATURAL_LAG = 0.12  # s, first-order lag of the natural-limb carrot tracking
NATURAL_CARROT_SPEED = 0.35  # m/s, natural-limb transport speed cap
NATURAL_REACH_SLACK = 0.90  # fraction of arm length past which the trunk assists
NATURAL_TRUNK_GAIN = 120.0  # deg/s per m of reach deficit
NATURAL_TRUNK_RELAX = 0.8  # 1/s, relaxation of natural trunk back to upright
TRUNK_ANGLE_LIMIT = 45.0  # deg, sanity clamp on the integrated trunk angle
PILOT_LATCH_RADIUS = 0.008  # m, pen-to-objective distance that ends pilot drive
PILOT_LATCH_SPEED = 0.03  # m/s, pen must also be this slow to count as arrived
ALIGN_GAIN = 2.0  # 1/s, post-task relaxation of the trunk onto the reference
ANALYSIS_CUTOFF_HZ = 5.0  # zero-phase low-pass applied before metrics
FILTER_ORDER = 3


class SimulationDiverged(RuntimeError):
    pass


def build_task(ref: TaskRef, table_z: float, line_start_y: float) -> TaskSpec:
    """Materialize a task from its config reference."""
    if ref.geometry_file:
        return load_task_file(ref.geometry_file)
    if ref.kind is TaskKind.LINE:
        return line_task(
            length=ref.length,
            start=(line_start_y, table_z),
            speed_instruction=ref.speed_instruction,
        )
    if ref.kind is TaskKind.PATH_TRACE:
        return racetrack_task(ref.scale or "large", speed_instruction=ref.speed_instruction)
    return reaching_task()


def _plane_for(task: TaskSpec, table_z: float) -> Plane:
    if task.kind is TaskKind.LINE:
        return Plane(axis="z", offset=table_z)
    if task.kind is TaskKind.REACHING:
        return Plane(axis="y", offset=SCREEN_Y)
    return Plane(axis=None)  # whiteboard contour: surface is the sagittal plane


def _pen_start(task: TaskSpec) -> np.ndarray:
    if task.kind is TaskKind.REACHING:
        return np.array([0.44, 0.22])
    return task.points[0].copy()


class TrialEngine:
    """Advances one trial substep at a time; input is the trunk angle."""

    def __init__(self, config: TrialConfig):
        self.config = config
        self.task = build_task(config.task, config.table_z, config.line_start_y)
        self.plane = _plane_for(self.task, config.table_z)

        self.lengths = config.lengths
        if config.arm_condition is not ArmCondition.NATURAL:
            self.lengths = replace(config.lengths, elbow_mount_offset=PROSTHESIS_MOUNT_OFFSET)

        self.dt = config.snapped_dt()
        self.n_sub = config.substeps_per_sample()
        self.natural = config.arm_condition is ArmCondition.NATURAL

        # initial posture: trunk at the working stance (or the script start),
        # arm put at the pen start
        trunk0 = config.script.waypoints[0][1] if config.script else config.stance_lean
        start = _pen_start(self.task)
        seed_body = BodyState(trunk0, 45.0, 70.0)
        ik = natural_limb_ik(tuple(start), trunk0, self.lengths, seed_body)
        if not ik.reachable:
            raise ValueError(f"trial start pen position {start} unreachable")
        self.phi = trunk0
        self.theta = ik.shoulder_angle
        self.beta = ik.elbow_angle

        # the freeze anchor is the calibration posture; the reference itself
        # starts settled on the stance (the user calibrates, adopts the
        # working posture, and lets the reference converge before drawing)
        self.params = replace(config.controller, ref_initial=config.calibration_angle)
        self.state = make_initial_state(self.params, trunk0)
        self.last_cmd = ControlCommand(0.0, 0.0, trunk0, False)

        self.progress = TaskProgress(task=self.task)
        body = BodyState(self.phi, self.theta, self.beta)
        self.pen = forward_kinematics(body, self.lengths, plane=self.plane)

        # carrot state (moving path target / lagged natural target)
        self._carrot_arc = 0.0
        self._natural_target = start.astype(float).copy()
        self._poly = self.task.polyline()
        seg = np.diff(self._poly, axis=0)
        self._seg_len = np.hypot(seg[:, 0], seg[:, 1])
        self._arc = np.concatenate([[0.0], np.cumsum(self._seg_len)])

        self.carrot_speed = config.carrot_speed
        if self.carrot_speed is None:
            instruction = self.task.speed_instruction or SpeedInstruction.MEDIUM
            self.carrot_speed = CARROT_SPEEDS[instruction]

        self.i_sub = 0
        self.rows: list[tuple] = []
        self.n_limit_events = 0
        self._at_limit = False
        self._prev_theta = self.theta
        self._prev_beta = self.beta
        self._prev_phi = self.phi
        self.pilot_done = False
        self._emit_row()  # t = 0 row, task cue

    # --- targets ------------------------------------------------------

    @property
    def t(self) -> float:
        return self.i_sub * self.dt

    def _point_at_arc(self, s: float) -> np.ndarray:
        s = min(max(s, 0.0), self._arc[-1])
        j = int(np.searchsorted(self._arc, s, side="right") - 1)
        j = min(j, len(self._seg_len) - 1)
        if self._seg_len[j] == 0.0:
            return self._poly[j].copy()
        f = (s - self._arc[j]) / self._seg_len[j]
        return self._poly[j] + f * (self._poly[j + 1] - self._poly[j])

    def carrot(self) -> np.ndarray:
        """The point the pilot steers toward at the current time."""
        if self.task.kind is TaskKind.PATH_TRACE:
            self._carrot_arc = min(self.carrot_speed * max(0.0, self.t - 0.5), self._arc[-1])
            return self._point_at_arc(self._carrot_arc)
        if self.task.kind is TaskKind.LINE and (
            self.natural or self.config.pilot.mode is PilotMode.NATURAL_LIMB
        ):
            # natural line drawing follows a constant-speed out-and-back carrot
            span = float(np.linalg.norm(self.task.points[1] - self.task.points[0]))
            s = self.carrot_speed * max(0.0, self.t - 0.5)
            s = min(s, 2.0 * span)
            along = span - abs(s - span)
            u = (self.task.points[1] - self.task.points[0]) / span
            return self.task.points[0] + along * u
        return np.asarray(self.progress.current_target(), dtype=float)

    def pilot_error(self) -> tuple[np.ndarray, np.ndarray]:
        """(pen error vector, drive direction) for the feedback pilot."""
        target = self.carrot()
        pen = np.asarray(self.pen.position)
        error = target - pen
        pen_speed = math.hypot(*self.pen.velocity)
        if self.task.kind is TaskKind.LINE:
            a, b = self.task.points
            drive = (b - a) / np.linalg.norm(b - a)
            if self.progress.reached_far and not self.pilot_done:
                arrived = np.linalg.norm(pen - self.task.points[0]) <= PILOT_LATCH_RADIUS
                if arrived and pen_speed <= PILOT_LATCH_SPEED:
                    self.pilot_done = True
        else:
            shoulder = joint_positions(
                BodyState(self.phi, self.theta, self.beta), self.lengths
            )[1]
            radial = target - shoulder
            norm = np.linalg.norm(radial)
            drive = radial / norm if norm > 0 else np.array([1.0, 0.0])
            if self.task.kind is TaskKind.PATH_TRACE and not self.pilot_done:
                if self._carrot_arc >= self._arc[-1] and np.linalg.norm(error) <= PILOT_LATCH_RADIUS:
                    self.pilot_done = True
        if self.pilot_done or self.progress.done:
            return np.zeros(2), drive
        return error, drive

    def _shoulder_target(self) -> np.ndarray:
        if self.task.kind is TaskKind.LINE:
            return np.array([self.pen.position[0], self.plane.offset])
        return self.carrot()

    def alignment_rate(self) -> float:
        """Post-task trunk rate: realign with the reference posture.

        Once the pen objective is finished the pilot stops chasing the
        pen and relaxes the trunk onto the controller reference, which
        zeroes the error inside the deadzone and stops the elbow.
        """
        rate = ALIGN_GAIN * (self.state.ref_angle - self.phi)
        cap = self.config.pilot.trunk_rate_max
        return min(cap, max(-cap, rate))

    def natural_trunk_rate(self) -> float:
        """Trunk assist for the natural limb: lean when reach runs short.

        The trunk leans forward proportionally to the reach deficit
        (target beyond ~90% of arm length) and otherwise relaxes back
        toward upright.
        """
        target = (
            np.asarray(self.progress.current_target(), dtype=float)
            if self.task.kind is TaskKind.REACHING
            else self.carrot()
        )
        shoulder = joint_positions(BodyState(self.phi, self.theta, clamp_elbow(self.beta)), self.lengths)[1]
        d_needed = float(np.linalg.norm(target - shoulder))
        soft = NATURAL_REACH_SLACK * (self.lengths.upper_arm_len + self.lengths.forearm_pen_len)
        deficit = max(0.0, d_needed - soft)
        rate = NATURAL_TRUNK_GAIN * deficit - NATURAL_TRUNK_RELAX * self.phi
        cap = self.config.pilot.trunk_rate_max
        return min(cap, max(-cap, rate))

    # --- stepping -------------------------------------------------------

    def substep(self, trunk_angle: float) -> None:
        """Advance one dt with the given trunk angle (deg)."""
        if not math.isfinite(trunk_angle):
            raise SimulationDiverged(f"non-finite trunk input at t = {self.t:.3f} s")
        self.phi = min(TRUNK_ANGLE_LIMIT, max(-TRUNK_ANGLE_LIMIT, trunk_angle))

        if self.natural:
            target = self.carrot()
            # visuomotor lag toward the carrot (speed-capped), exact 2-link IK
            k = self.dt / (NATURAL_LAG + self.dt)
            step_vec = k * (target - self._natural_target)
            step_norm = float(np.linalg.norm(step_vec))
            max_step = NATURAL_CARROT_SPEED * self.dt
            if step_norm > max_step:
                step_vec = step_vec * (max_step / step_norm)
            self._natural_target += step_vec
            prev = BodyState(self.phi, self.theta, clamp_elbow(self.beta))
            ik = natural_limb_ik(tuple(self._natural_target), self.phi, self.lengths, prev)
            max_step = SHOULDER_RATE_MAX * self.dt
            self.theta += min(max_step, max(-max_step, ik.shoulder_angle - self.theta))
            self.beta = clamp_elbow(
                self.beta + min(max_step, max(-max_step, ik.elbow_angle - self.beta))
            )
            self.last_cmd = ControlCommand(0.0, 0.0, self.params.ref_initial, False)
        else:
            self.state, cmd = step_controller(self.state, self.params, self.phi, self.dt)
            self.last_cmd = cmd
            # positive command = extension = flexion angle decreasing
            raw = self.beta - cmd.omega_elbow * self.dt
            clamped = clamp_elbow(raw)
            if clamped != raw:
                if not self._at_limit:
                    self.n_limit_events += 1
                self._at_limit = True
            else:
                self._at_limit = False
            self.beta = clamped
            target = self._shoulder_target()
            body = BodyState(self.phi, self.theta, self.beta)
            theta_star = shoulder_compensate(body, self.lengths, tuple(target))
            max_step = SHOULDER_RATE_MAX * self.dt
            self.theta += min(max_step, max(-max_step, theta_star - self.theta))

        rates = (
            (self.phi - self._prev_phi) / self.dt,
            (self.theta - self._prev_theta) / self.dt,
            (self.beta - self._prev_beta) / self.dt,
        )
        self._prev_phi, self._prev_theta, self._prev_beta = self.phi, self.theta, self.beta
        body = BodyState(self.phi, self.theta, self.beta)
        self.pen = forward_kinematics(body, self.lengths, joint_rates=rates, plane=self.plane)

        self.i_sub += 1
        if self.i_sub % self.n_sub == 0:
            self._emit_row()

    def _emit_row(self) -> None:
        t_row = len(self.rows) / self.config.sample_rate
        values = (
            self.phi,
            self.state.ref_angle if not self.natural else self.params.ref_initial,
            self.last_cmd.error if not self.natural else 0.0,
            self.theta,
            self.beta,
            self.last_cmd.omega_elbow,
            self.pen.position[0],
            self.pen.position[1],
        )
        if not all(math.isfinite(v) for v in values):
            raise SimulationDiverged(f"non-finite state at t = {t_row:.3f} s: {values}")
        self.progress = evaluate_sample(self.task, self.pen, t_row, self.progress)
        self.rows.append(
            (
                t_row,
                *values[:8],
                self.pen.in_contact,
                self.last_cmd.motor_active if not self.natural else False,
                self.progress.target_index,
                self.state.frozen if not self.natural else False,
            )
        )

    # --- output ---------------------------------------------------------

    def finalize(self) -> TrialLog:
        arr = list(zip(*self.rows))
        columns = {
            name: np.array(arr[i], dtype=(bool if name in ("in_contact", "motor_active", "frozen") else (int if name == "target_index" else float)))
            for i, name in enumerate(LOG_COLUMNS)
        }
        header = {
            "schema_version": 1,
            "config_hash": config_hash(self.config),
            "config": config_to_dict(self.config),
            "sample_rate": self.config.sample_rate,
            "dt_sim": self.dt,
        }
        summary = {
            "task_kind": self.task.kind.value,
            "arm_condition": self.config.arm_condition.value,
            "completed": self.progress.done,
            "started_at": self.progress.started_at,
            "ended_at": self.progress.ended_at,
            "acquisitions": [[k, e, a] for k, e, a in self.progress.acquisitions],
            "n_limit_events": self.n_limit_events,
            "ref_initial": self.params.ref_initial,
        }
        return TrialLog(columns=columns, header=header, events=self.progress.events, summary=summary)


def _default_max_duration(engine: TrialEngine, config: TrialConfig) -> float:
    if config.max_duration is not None:
        return config.max_duration
    if config.script is not None:
        return config.script.duration + 5.0
    kind = engine.task.kind
    if kind is TaskKind.LINE:
        return 45.0
    if kind is TaskKind.PATH_TRACE:
        return engine.task.path_length() / engine.carrot_speed + 25.0
    return 150.0


def run_trial(config: TrialConfig) -> TrialLog:
    """Run one deterministic fixed-step trial from its config.

    The pilot drives the trunk (scripted waypoints, delayed release-catch
    feedback, or the natural-limb carrot); everything else follows the
    substep pipeline.  The log is downsampled to ``config.sample_rate``.
    """
    engine = TrialEngine(config)
    dt = engine.dt
    max_t = _default_max_duration(engine, config)
    feedback = (
        config.arm_condition is not ArmCondition.NATURAL
        and config.script is None
        and config.pilot.mode is PilotMode.RELEASE_CATCH_FEEDBACK
    )
    pilot = ReleaseCatchPilot(config.pilot, dt) if feedback else None

    done_at: float | None = None
    while True:
        t = engine.t
        if t >= max_t:
            break
        if engine.progress.done:
            if done_at is None:
                done_at = t
            if t - done_at >= config.settle_tail:
                break
        if config.script is not None:
            trunk, _ = sample_trunk(config.script, t)
        elif feedback:
            error, drive = engine.pilot_error()
            if engine.pilot_done or engine.progress.done:
                rate = engine.alignment_rate()
            else:
                rate = pilot.step(tuple(error), tuple(drive), engine.last_cmd, dt)
            trunk = engine.phi + rate * dt
        elif engine.natural:
            trunk = engine.phi + engine.natural_trunk_rate() * dt
        else:
            trunk = engine.phi
        engine.substep(trunk)
    return engine.finalize()


# --- metric report ------------------------------------------------------


def filtered_channel(log: TrialLog, name: str) -> TimeSeries:
    series = log.channel(name)
    coeffs = butterworth_coeffs(FILTER_ORDER, ANALYSIS_CUTOFF_HZ, series.rate)
    return filtfilt(series, coeffs)


def compute_report(log: TrialLog, task: TaskSpec | None = None) -> MetricReport:
    """All assessment metrics for one trial log.

    Every channel is zero-phase low-pass filtered at 5 Hz before any
    metric; joint metrics and speed-based metrics are restricted to the
    task-active window when the trial completed.
    """
    summary = log.summary
    kind = summary.get("task_kind", task.kind.value if task else "line")
    completed = bool(summary.get("completed", False))
    started = summary.get("started_at")
    ended = summary.get("ended_at")

    phi = filtered_channel(log, "phi")
    theta = filtered_channel(log, "theta")
    beta = filtered_channel(log, "beta")
    pen_y = filtered_channel(log, "pen_y")
    pen_z = filtered_channel(log, "pen_z")

    window = log.time_mask(started, ended if completed else None)
    if window.sum() < 8:
        window = np.ones(len(log), dtype=bool)

    def windowed(series: TimeSeries) -> TimeSeries:
        t = series.t[window]
        return TimeSeries(t=t, values=series.values[window], rate=series.rate)

    vy = differentiate(pen_y)
    vz = differentiate(pen_z)
    speed_values = np.hypot(vy.values, vz.values)
    speed = TimeSeries(t=vy.t, values=speed_values, rate=vy.rate)

    sparc_value = None
    w_speed = windowed(speed)
    if len(w_speed) >= 32 and float(np.ptp(w_speed.values)) > 0.0:
        sparc_value = sparc(w_speed)

    try:
        ct = completion_time(log)
    except ValueError:
        ct = None  # external logs carry no progress markers

    report = dict(
        task_kind=kind,
        completed=completed,
        completion_time=ct,
        sparc=sparc_value,
        rom_trunk=range_of_motion(windowed(phi)),
        rom_shoulder=range_of_motion(windowed(theta)),
        rom_elbow=range_of_motion(windowed(beta)),
        total_trunk=total_movement(windowed(phi)),
        total_shoulder=total_movement(windowed(theta)),
        total_elbow=total_movement(windowed(beta)),
        precision_mm=None,
        plr=None,
        sjvi=None,
    )

    positions = np.column_stack([pen_y.values, pen_z.values])

    if kind in (TaskKind.LINE.value, TaskKind.PATH_TRACE.value) and task is not None:
        contact = log.columns["in_contact"].astype(bool) & window
        drawn = positions[contact]
        if len(drawn) >= 2:
            report["precision_mm"] = precision_score(drawn, task.polyline())

    if kind == TaskKind.REACHING.value:
        acq = summary.get("acquisitions", [])
        if acq:
            t = log.columns["t"]
            plrs = []
            prev_acquired = started if started is not None else 0.0
            for k, entry, acquired in acq:
                mask = (t >= prev_acquired) & (t <= entry)
                if mask.sum() >= 2:
                    try:
                        plrs.append(path_length_ratio(positions[mask]))
                    except ValueError:
                        pass
                prev_acquired = acquired
            if plrs:
                report["plr"] = float(np.mean(plrs))
            if len(acq) >= 2:
                bounds = [
                    (acq[i - 1][2], acq[i][2]) for i in range(1, len(acq))
                ]  # transport phases 2..N (cue to acquisition)
                elbow_rate = differentiate(beta)
                shoulder_rate = differentiate(theta)
                report["sjvi"] = sjvi(elbow_rate, shoulder_rate, bounds)

    return MetricReport(**report)


# --- sweeps ---------------------------------------------------------------


@dataclass
class SweepCell:
    label: str
    config: TrialConfig
    log: TrialLog | None
    report: MetricReport | None
    error: str | None


@dataclass
class SweepResult:
    cells: list[SweepCell]

    def aggregate_csv(self) -> str:
        """Condition x metric table (mean and SD over repetitions)."""
        metrics = [
            "completion_time",
            "precision_mm",
            "sparc",
            "rom_trunk",
            "rom_shoulder",
            "rom_elbow",
            "total_trunk",
            "total_shoulder",
            "total_elbow",
        ]
        groups: dict[str, list[MetricReport]] = {}
        for cell in self.cells:
            if cell.report is None:
                continue
            key = cell.label.rsplit("/rep", 1)[0]
            groups.setdefault(key, []).append(cell.report)
        lines = ["condition,n," + ",".join(f"{m}_mean,{m}_sd" for m in metrics)]
        for key in sorted(groups):
            reports = groups[key]
            cells = [key, str(len(reports))]
            for m in metrics:
                values = [getattr(r, m) for r in reports if getattr(r, m) is not None]
                if values:
                    cells.append(repr(float(np.mean(values))))
                    cells.append(repr(float(np.std(values))))
                else:
                    cells.extend(["", ""])
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def run_sweep(
    base: TrialConfig,
    speeds: tuple[SpeedInstruction, ...] = (
        SpeedInstruction.SLOW,
        SpeedInstruction.MEDIUM,
        SpeedInstruction.FAST,
    ),
    scales: tuple[str, ...] = ("large", "small"),
    repetitions: int = 4,
) -> SweepResult:
    """Drawing condition grid: speeds x sizes x repetitions.

    Each repetition gets a deterministic seed-derived jitter of the
    carrot speed, pilot gain and reaction delay, standing in for
    trial-to-trial human variability.  Per-cell failures are isolated
    and recorded, not raised.
    """
    if not speeds or not scales or repetitions < 1:
        raise ValueError("sweep grid must be non-empty")
    cells: list[SweepCell] = []
    index = 0
    for scale in scales:
        scale = TrackScale(scale)
        for speed in speeds:
            speed = SpeedInstruction(speed)
            for rep in range(repetitions):
                seed = base.seed * 1_000_000 + index
                rng = np.random.default_rng(seed)
                jitter = 1.0 + 0.05 * rng.uniform(-1.0, 1.0)
                gain_jitter = 1.0 + 0.05 * rng.uniform(-1.0, 1.0)
                delay_jitter = 1.0 + 0.10 * rng.uniform(-1.0, 1.0)
                cfg = replace(
                    base,
                    task=TaskRef(
                        kind=TaskKind.PATH_TRACE,
                        scale=scale,
                        speed_instruction=speed,
                    ),
                    carrot_speed=CARROT_SPEEDS[speed] * jitter,
                    pilot=replace(
                        base.pilot,
                        pen_gain=base.pilot.pen_gain * gain_jitter,
                        reaction_delay=base.pilot.reaction_delay * delay_jitter,
                    ),
                    seed=seed,
                )
                label = f"{scale.value}/{speed.value}/rep{rep}"
                try:
                    log = run_trial(cfg)
                    report = compute_report(log, build_task(cfg.task, cfg.table_z, cfg.line_start_y))
                    cells.append(SweepCell(label, cfg, log, report, None))
                except Exception as exc:  # per-cell isolation
                    cells.append(SweepCell(label, cfg, None, None, f"{type(exc).__name__}: {exc}"))
                index += 1
    return SweepResult(cells=cells)
