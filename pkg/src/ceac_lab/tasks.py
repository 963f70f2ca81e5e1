"""Task battery: line drawing, racetrack tracing, nine-target reaching.

Geometry lives in the sagittal world frame (y forward, z up, meters).
The line task runs on a horizontal table plane seen edge-on; the
racetrack is a closed 2-D contour traced in the sagittal plane itself;
reaching targets sit at the published depths from a vertical screen,
with invented vertical positions (the in-plane projection of the task).

Progress evaluation consumes log-rate pen samples and tracks tolerance
state, target sequence/dwell, and the start/end timestamps that define
completion time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

import numpy as np

from .kinematics import PenPose

__all__ = [
    "TaskKind",
    "SpeedInstruction",
    "TrackScale",
    "TaskSpec",
    "TargetLayout",
    "NINE_TARGET_LAYOUT",
    "line_task",
    "racetrack_task",
    "reaching_task",
    "TaskProgress",
    "evaluate_sample",
    "load_task_file",
    "save_task_file",
]

TASK_SCHEMA_VERSION = 1

DEFAULT_TOLERANCE = 0.01  # m, drawing tolerance band and reaching sphere radius
DEFAULT_DWELL = 2.0  # s, hold time inside a reaching target
START_EPSILON = 0.005  # m, displacement past the start line that starts the clock
IMMOBILE_SPEED = 1e-3  # m/s, "immobile" pen speed bound for the drawing end rule
IMMOBILE_HOLD = 0.5  # s, how long the pen must stay immobile
END_LINE_RADIUS = 0.01  # m, how close to the start line the pen must return
SCREEN_Y = 0.56  # m, reaching screen plane (targets protrude toward the user)


class TaskKind(str, Enum):
    LINE = "line"
    PATH_TRACE = "path_trace"
    REACHING = "reaching"


class SpeedInstruction(str, Enum):
    SLOW = "slow"
    MEDIUM = "medium"
    FAST = "fast"


class TrackScale(str, Enum):
    LARGE = "large"
    SMALL = "small"


@dataclass(frozen=True)
class TaskSpec:
    """Geometric description of one task plus its evaluation parameters."""

    kind: TaskKind
    points: np.ndarray  # polyline (line/path) or target centers (reaching), (n, 2) m
    tolerance: float = DEFAULT_TOLERANCE
    speed_instruction: SpeedInstruction | None = None
    dwell_time: float | None = None
    scale: TrackScale | None = None
    closed: bool = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if not (self.tolerance > 0.0):
            raise ValueError("tolerance must be > 0")
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise ValueError("geometry needs at least two 2-D points")
        if self.kind is TaskKind.REACHING and len(pts) != 9:
            raise ValueError("reaching task needs exactly nine targets")

    def polyline(self) -> np.ndarray:
        """Reference polyline, with the closing segment appended for loops."""
        if self.closed:
            return np.vstack([self.points, self.points[:1]])
        return self.points

    def path_length(self) -> float:
        seg = np.diff(self.polyline(), axis=0)
        return float(np.hypot(seg[:, 0], seg[:, 1]).sum())


@dataclass(frozen=True)
class TargetLayout:
    """The nine-target layout: published depths, invented screen heights."""

    depths: tuple[float, ...]
    heights: tuple[float, ...]
    screen_y: float = SCREEN_Y

    def __post_init__(self):
        if len(self.depths) != 9 or len(self.heights) != 9:
            raise ValueError("layout needs exactly nine targets")
        allowed = {0.0, 0.05, 0.10, 0.15, 0.20}
        if not set(self.depths) <= allowed:
            raise ValueError(f"target depths must be within {sorted(allowed)}")

    def sim_targets(self) -> np.ndarray:
        y = self.screen_y - np.asarray(self.depths)
        return np.column_stack([y, np.asarray(self.heights)])


# Depth assignments are published (targets 2, 3, 9 flush; 1 at 5 cm; 5 at
# 10 cm; 4 and 7 at 15 cm; 6 and 8 at 20 cm); heights are a fixture.
NINE_TARGET_LAYOUT = TargetLayout(
    depths=(0.05, 0.0, 0.0, 0.15, 0.10, 0.20, 0.15, 0.20, 0.0),
    heights=(0.18, 0.30, 0.14, 0.38, 0.20, 0.32, 0.12, 0.42, 0.24),
)


def line_task(
    length: float = 0.20,
    start: tuple[float, float] = (0.15, 0.10),
    tolerance: float = DEFAULT_TOLERANCE,
    speed_instruction: SpeedInstruction | None = None,
) -> TaskSpec:
    """Forward-and-back line on the table plane (round trip A -> B -> A).

    The line runs along +y on the drawing surface; ``start`` is point A
    in world coordinates (its z is the table height).
    """
    if not (length > 0.0):
        raise ValueError("line length must be > 0")
    a = np.array(start, dtype=float)
    b = a + np.array([length, 0.0])
    return TaskSpec(
        kind=TaskKind.LINE,
        points=np.vstack([a, b]),
        tolerance=tolerance,
        speed_instruction=speed_instruction,
    )


def racetrack_task(
    scale: TrackScale | str = TrackScale.LARGE,
    speed_instruction: SpeedInstruction | None = None,
) -> TaskSpec:
    """Closed racetrack contour at the large (0.40 m) or small (0.28 m) size.

    The large contour is loaded from the bundled geometry file; the
    small variant is the large polyline scaled by 0.70 about its
    centroid.

    Raises:
        FileNotFoundError: bundled geometry file missing.
    """
    scale = TrackScale(scale)
    spec = load_task_file(resources.files("ceac_lab.data") / "racetrack_large.json")
    points = spec.points
    if scale is TrackScale.SMALL:
        centroid = points.mean(axis=0)
        points = centroid + 0.70 * (points - centroid)
    return TaskSpec(
        kind=TaskKind.PATH_TRACE,
        points=points,
        tolerance=spec.tolerance,
        speed_instruction=speed_instruction,
        scale=scale,
        closed=True,
    )


def reaching_task(layout: TargetLayout = NINE_TARGET_LAYOUT) -> TaskSpec:
    """Nine-target reaching with 1 cm tolerance spheres and 2 s dwells."""
    return TaskSpec(
        kind=TaskKind.REACHING,
        points=layout.sim_targets(),
        tolerance=DEFAULT_TOLERANCE,
        dwell_time=DEFAULT_DWELL,
    )


def _closest_on_polyline(point: np.ndarray, polyline: np.ndarray) -> tuple[float, float]:
    """(distance, arc position) of the closest point on a polyline."""
    a = polyline[:-1]
    d = polyline[1:] - a
    seg_len = np.hypot(d[:, 0], d[:, 1])
    seg_len_sq = np.where(seg_len == 0.0, 1.0, seg_len**2)
    diff = point[None, :] - a
    t = np.clip(np.einsum("jk,jk->j", diff, d) / seg_len_sq, 0.0, 1.0)
    proj = a + t[:, None] * d
    dist = np.hypot(point[0] - proj[:, 0], point[1] - proj[:, 1])
    j = int(np.argmin(dist))
    arc = float(np.concatenate([[0.0], np.cumsum(seg_len)])[j] + t[j] * seg_len[j])
    return float(dist[j]), arc


@dataclass
class TaskProgress:
    """Mutable per-trial task state advanced by :func:`evaluate_sample`."""

    task: TaskSpec
    started_at: float | None = None
    ended_at: float | None = None
    in_tolerance: bool = False
    target_index: int = 1  # reaching: 1-based index of the active target
    dwell_entered_at: float | None = None
    reached_far: bool = False  # drawing: far endpoint / half arc reached
    acquisitions: list[tuple[int, float, float]] = field(default_factory=list)
    events: list[tuple[float, str]] = field(default_factory=list)
    _immobile_since: float | None = None
    _last_pen: tuple[float, float] | None = None
    _last_t: float | None = None

    @property
    def done(self) -> bool:
        return self.ended_at is not None

    def current_target(self) -> np.ndarray:
        """The point the pilot is currently steering toward."""
        pts = self.task.points
        if self.task.kind is TaskKind.REACHING:
            return pts[min(self.target_index, len(pts)) - 1]
        if self.task.kind is TaskKind.LINE:
            return pts[0] if self.reached_far else pts[1]
        return pts[0]

    def completion_time(self) -> float | None:
        if self.started_at is None or self.ended_at is None:
            return None
        return self.ended_at - self.started_at


def _pen_speed(progress: TaskProgress, pen: tuple[float, float], t: float) -> float:
    if progress._last_pen is None or progress._last_t is None or t <= progress._last_t:
        return math.inf
    d = math.hypot(pen[0] - progress._last_pen[0], pen[1] - progress._last_pen[1])
    return d / (t - progress._last_t)


def _evaluate_drawing(progress: TaskProgress, pen: PenPose, t: float) -> None:
    task = progress.task
    poly = task.polyline()
    point = np.asarray(pen.position)
    dist, arc = _closest_on_polyline(point, poly)
    progress.in_tolerance = bool(dist <= task.tolerance and pen.in_contact)

    if task.kind is TaskKind.LINE:
        a, b = task.points[0], task.points[1]
        u = (b - a) / np.linalg.norm(b - a)
        s = float(np.dot(point - a, u))  # signed along-path displacement from A
        dist_to_start = abs(s)
        if not progress.reached_far and np.linalg.norm(point - b) <= task.tolerance:
            progress.reached_far = True
            progress.events.append((t, "far_endpoint_reached"))
    else:
        s = arc
        dist_to_start = min(arc, task.path_length() - arc)
        if not progress.reached_far and arc >= 0.5 * task.path_length():
            progress.reached_far = True
            progress.events.append((t, "half_path_reached"))

    if progress.started_at is None and s > START_EPSILON:
        progress.started_at = t
        progress.events.append((t, "task_started"))

    # end rule: returned to the start line and immobile for IMMOBILE_HOLD
    if progress.started_at is not None and progress.ended_at is None and progress.reached_far:
        speed = _pen_speed(progress, pen.position, t)
        at_line = dist_to_start <= END_LINE_RADIUS
        if at_line and speed < IMMOBILE_SPEED:
            if progress._immobile_since is None:
                progress._immobile_since = t
            elif t - progress._immobile_since >= IMMOBILE_HOLD:
                progress.ended_at = progress._immobile_since
                progress.events.append((progress.ended_at, "task_ended"))
        else:
            progress._immobile_since = None


def _evaluate_reaching(progress: TaskProgress, pen: PenPose, t: float) -> None:
    task = progress.task
    if progress.started_at is None:
        progress.started_at = t  # first target cue
        progress.events.append((t, "task_started"))
    if progress.target_index > len(task.points):
        progress.in_tolerance = False
        return
    target = task.points[progress.target_index - 1]
    inside = math.hypot(pen.position[0] - target[0], pen.position[1] - target[1]) <= task.tolerance
    progress.in_tolerance = bool(inside)
    if not inside:
        progress.dwell_entered_at = None
        return
    if progress.dwell_entered_at is None:
        progress.dwell_entered_at = t
        progress.events.append((t, f"dwell_enter_{progress.target_index}"))
    if t - progress.dwell_entered_at >= (task.dwell_time or 0.0):
        k = progress.target_index
        progress.acquisitions.append((k, progress.dwell_entered_at, t))
        progress.events.append((t, f"target_acquired_{k}"))
        if k == len(task.points):
            # completion clock stops at the entry of the final successful dwell
            progress.ended_at = progress.dwell_entered_at
            progress.events.append((progress.ended_at, "task_ended"))
        progress.target_index = k + 1
        progress.dwell_entered_at = None


def evaluate_sample(task: TaskSpec, pen: PenPose, t: float, progress: TaskProgress | None) -> TaskProgress:
    """Advance task progress with one pen sample (monotone t required).

    Updates the tolerance flag, the active target / dwell countdown, and
    the start/end timestamps.  Drawing traces count only samples with
    the pen in contact; that gating is applied by the caller via
    ``pen.in_contact`` when assembling traces, while tolerance here
    already requires contact for drawing tasks.
    """
    if progress is None:
        progress = TaskProgress(task=task)
    if progress._last_t is not None and t < progress._last_t:
        raise ValueError("evaluate_sample requires monotone time")
    if task.kind is TaskKind.REACHING:
        _evaluate_reaching(progress, pen, t)
    else:
        _evaluate_drawing(progress, pen, t)
    progress._last_pen = pen.position
    progress._last_t = t
    return progress


def save_task_file(spec: TaskSpec, path) -> None:
    """Write a task geometry file (JSON, versioned schema)."""
    payload = {
        "schema_version": TASK_SCHEMA_VERSION,
        "kind": spec.kind.value,
        "points": [[float(y), float(z)] for y, z in spec.points],
        "tolerance_m": spec.tolerance,
        "dwell_s": spec.dwell_time,
        "scale": spec.scale.value if spec.scale else None,
        "closed": spec.closed,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)


def load_task_file(path) -> TaskSpec:
    """Load a task geometry file, rejecting unknown schema versions."""
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except FileNotFoundError:
        raise FileNotFoundError(f"task geometry file not found: {path}")
    version = payload.get("schema_version")
    if version != TASK_SCHEMA_VERSION:
        raise ValueError(
            f"task file schema_version {version!r} not supported "
            f"(expected {TASK_SCHEMA_VERSION}); migrate the file first"
        )
    return TaskSpec(
        kind=TaskKind(payload["kind"]),
        points=np.asarray(payload["points"], dtype=float),
        tolerance=float(payload["tolerance_m"]),
        dwell_time=payload.get("dwell_s"),
        scale=TrackScale(payload["scale"]) if payload.get("scale") else None,
        closed=bool(payload.get("closed", False)),
    )
