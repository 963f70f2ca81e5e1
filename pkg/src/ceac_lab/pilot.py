"""The simulated human operating the arm.

Three pilot behaviours:

* scripted — the trunk follows a waypoint script (minimum-jerk, linear
  or hold interpolation); the shoulder keeps the pen on task.
* release_catch_feedback — the trunk rate is a delayed proportional
  feedback of the pen error projected on a drive direction, which
  closes the loop around the velocity controller and produces the
  forward/back micro-cycle behaviour emergently.
* natural_limb — shoulder and elbow are both human-driven through
  analytic 2-link inverse kinematics (the natural-elbow comparison arm).

The human is modeled kinematically: per-step shoulder placement stands
in for visual servoing, and every ambiguity is broken toward the
previous posture (minimal movement), which keeps trials reproducible.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .control import ControlCommand
from .kinematics import (
    ELBOW_RANGE,
    SHOULDER_RANGE,
    BodyState,
    SegmentLengths,
    clamp_elbow,
    joint_positions,
    reach_phase_offset,
    reach_radius,
)

__all__ = [
    "PilotMode",
    "PilotPolicy",
    "TrunkScript",
    "IkSolution",
    "sample_trunk",
    "shoulder_compensate",
    "natural_limb_ik",
    "ReleaseCatchPilot",
    "release_catch_policy",
]


class PilotMode(str, Enum):
    SCRIPTED = "scripted"
    RELEASE_CATCH_FEEDBACK = "release_catch_feedback"
    NATURAL_LIMB = "natural_limb"


@dataclass(frozen=True)
class PilotPolicy:
    """Virtual-pilot parameters.

    pen_gain maps pen error (m) to trunk rate (deg/s); trunk_rate_max
    caps the commanded rate; reaction_delay models visuomotor latency
    (default 150 ms, configurable).
    """

    mode: PilotMode = PilotMode.RELEASE_CATCH_FEEDBACK
    pen_gain: float = 400.0
    trunk_rate_max: float = 10.0
    reaction_delay: float = 0.15

    def __post_init__(self):
        if not (self.pen_gain > 0.0):
            raise ValueError("pen_gain must be > 0")
        if not (self.trunk_rate_max > 0.0):
            raise ValueError("trunk_rate_max must be > 0")
        if self.reaction_delay < 0.0:
            raise ValueError("reaction_delay must be >= 0")


class Interpolation(str, Enum):
    MINIMUM_JERK = "minimum_jerk"
    LINEAR = "linear"
    HOLD = "hold"


@dataclass(frozen=True)
class TrunkScript:
    """Trunk trajectory as (time, angle) waypoints plus an interpolation rule."""

    waypoints: tuple[tuple[float, float], ...]
    interpolation: Interpolation = Interpolation.MINIMUM_JERK

    def __post_init__(self):
        if len(self.waypoints) == 0:
            raise ValueError("script needs at least one waypoint")
        times = [t for t, _ in self.waypoints]
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ValueError("waypoint times must be strictly increasing")
        if not all(math.isfinite(t) and math.isfinite(a) for t, a in self.waypoints):
            raise ValueError("waypoints must be finite")

    @property
    def duration(self) -> float:
        return self.waypoints[-1][0]


def _min_jerk(s: float) -> tuple[float, float]:
    """Quintic blend sigma(s) and its derivative d sigma/ds on [0, 1]."""
    s2 = s * s
    s3 = s2 * s
    sigma = s3 * (10.0 - 15.0 * s + 6.0 * s2)
    dsigma = 30.0 * s2 * (1.0 - 2.0 * s + s2)
    return sigma, dsigma


def sample_trunk(script: TrunkScript, t: float) -> tuple[float, float]:
    """Sample a trunk script: returns (angle deg, rate deg/s).

    Minimum-jerk segments are C2 with zero velocity and acceleration at
    every waypoint; the rate is the analytic derivative.  Outside the
    scripted span the angle clamps to the boundary waypoint with zero
    rate.
    """
    wps = script.waypoints
    if t <= wps[0][0]:
        return wps[0][1], 0.0
    if t >= wps[-1][0]:
        return wps[-1][1], 0.0
    # locate the active segment
    for (t0, a0), (t1, a1) in zip(wps, wps[1:]):
        if t0 <= t < t1:
            break
    span = t1 - t0
    s = (t - t0) / span
    if script.interpolation is Interpolation.HOLD:
        return a0, 0.0
    if script.interpolation is Interpolation.LINEAR:
        return a0 + (a1 - a0) * s, (a1 - a0) / span
    sigma, dsigma = _min_jerk(s)
    return a0 + (a1 - a0) * sigma, (a1 - a0) * dsigma / span


def shoulder_compensate(
    body: BodyState,
    lengths: SegmentLengths,
    pen_target: tuple[float, float],
) -> float:
    """Shoulder angle (deg) minimizing pen-tip distance to a target.

    Trunk and elbow are held fixed, so the pen moves on a circle around
    the shoulder joint; the minimizing angle points the reach radius at
    the target, clamped to the shoulder range.  Ties (including a
    target already reached, or a degenerate target at the circle
    center) are broken toward the previous shoulder angle.
    """
    pts = joint_positions(body, lengths)
    shoulder = pts[1]
    dy = pen_target[0] - shoulder[0]
    dz = pen_target[1] - shoulder[1]
    prev = body.shoulder_angle
    lo, hi = SHOULDER_RANGE

    if math.hypot(dy, dz) < 1e-12:
        # target at the shoulder joint: every angle is equidistant
        return min(hi, max(lo, prev))

    # pen = shoulder + r * unit(phi + theta + psi) with psi set by the elbow
    aim = math.degrees(math.atan2(dy, dz))
    psi = reach_phase_offset(body.elbow_angle, lengths)
    theta_star = aim - psi - body.trunk_angle

    def pen_distance_sq(theta: float) -> float:
        a = math.radians(body.trunk_angle + theta + psi)
        r = reach_radius(body.elbow_angle, lengths)
        py = shoulder[0] + r * math.sin(a)
        pz = shoulder[1] + r * math.cos(a)
        return (py - pen_target[0]) ** 2 + (pz - pen_target[1]) ** 2

    if lo <= theta_star <= hi:
        best = theta_star
    else:
        # unconstrained optimum out of range: best is one of the bounds
        best = lo if pen_distance_sq(lo) <= pen_distance_sq(hi) else hi

    if lo <= prev <= hi and pen_distance_sq(prev) <= pen_distance_sq(best) + 1e-18:
        return prev
    return best


class IkSolution(NamedTuple):
    shoulder_angle: float
    elbow_angle: float
    reachable: bool


def natural_limb_ik(
    pen_target: tuple[float, float],
    trunk_angle: float,
    lengths: SegmentLengths,
    previous: BodyState,
) -> IkSolution:
    """Analytic 2-link IK for the natural-limb condition.

    Solves shoulder and elbow so the pen reaches the target from the
    shoulder origin set by ``trunk_angle``.  Of the two elbow branches,
    the in-range solution closest to the previous elbow angle wins;
    out-of-annulus targets are clamped to the closest reachable posture
    and flagged unreachable.  ``previous`` supplies the hip position and
    the continuity tie-break.
    """
    lu, lf = lengths.upper_arm_len, lengths.forearm_pen_len
    shoulder = (
        previous.hip_position[0] + lengths.trunk_len * math.sin(math.radians(trunk_angle)),
        previous.hip_position[1] + lengths.trunk_len * math.cos(math.radians(trunk_angle)),
    )
    dy = pen_target[0] - float(shoulder[0])
    dz = pen_target[1] - float(shoulder[1])
    r = math.hypot(dy, dz)
    offset = lengths.elbow_mount_offset

    # elbow flexion from the law of cosines on the effective bend angle
    cos_bend = (r * r - lu * lu - lf * lf) / (2.0 * lu * lf)
    reachable = -1.0 - 1e-9 <= cos_bend <= 1.0 + 1e-9
    cos_bend = min(1.0, max(-1.0, cos_bend))
    bend = math.degrees(math.acos(cos_bend))

    lo, hi = ELBOW_RANGE
    candidates = []
    for signed_bend in (bend, -bend):
        beta = signed_bend - offset
        beta_clamped = clamp_elbow(beta)
        in_range = lo <= beta <= hi
        candidates.append((in_range, abs(beta - previous.elbow_angle), beta_clamped))
    # prefer in-range branches, then continuity with the previous elbow
    candidates.sort(key=lambda c: (not c[0], c[1]))
    in_range, _, beta = candidates[0]
    if not in_range:
        reachable = False

    aim = math.degrees(math.atan2(dy, dz))
    psi = reach_phase_offset(beta, lengths)
    theta = aim - psi - trunk_angle
    s_lo, s_hi = SHOULDER_RANGE
    if not (s_lo <= theta <= s_hi):
        theta = min(s_hi, max(s_lo, theta))
        reachable = False
    return IkSolution(theta, beta, reachable)


def release_catch_policy(
    pen_error: tuple[float, float],
    controller_view: ControlCommand | None,
    policy: PilotPolicy,
    dt: float,
    drive_direction: tuple[float, float],
    buffer: deque,
) -> float:
    """One step of the delayed proportional trunk-rate law.

    The raw rate is pen_gain times the pen error projected on the drive
    direction, clamped to +-trunk_rate_max; the returned value is that
    rate delayed by the policy's reaction time (zeros until the buffer
    fills).  ``controller_view`` is accepted so richer policies can
    react to, e.g., the freeze flag; this law does not use it.

    The buffer must be created by :func:`make_delay_buffer` with the
    same dt the caller steps at.
    """
    along = pen_error[0] * drive_direction[0] + pen_error[1] * drive_direction[1]
    raw = policy.pen_gain * along
    raw = max(-policy.trunk_rate_max, min(policy.trunk_rate_max, raw))
    buffer.append(raw)
    return buffer.popleft()


def make_delay_buffer(policy: PilotPolicy, dt: float) -> deque:
    """Circular buffer realizing the policy's reaction delay at step dt."""
    n = int(round(policy.reaction_delay / dt))
    return deque([0.0] * n, maxlen=n + 1)


class ReleaseCatchPilot:
    """Stateful wrapper tying the delayed feedback law to one trial."""

    def __init__(self, policy: PilotPolicy, dt: float):
        self.policy = policy
        self._buffer = make_delay_buffer(policy, dt)

    def step(
        self,
        pen_error: tuple[float, float],
        drive_direction: tuple[float, float],
        controller_view: ControlCommand | None,
        dt: float,
    ) -> float:
        return release_catch_policy(
            pen_error, controller_view, self.policy, dt, drive_direction, self._buffer
        )
