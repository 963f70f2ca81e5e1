"""Planar sagittal 3-link human-prosthesis chain.

The chain is hip -> (trunk) -> shoulder -> (upper arm) -> elbow ->
(forearm+pen) -> pen tip, all in the sagittal plane.  World frame:
y horizontal pointing forward (toward the table), z vertical up, both
in meters.  A link at cumulative angle ``a`` (degrees from vertical,
forward positive) points along ``(sin a, cos a)``, so the zero posture
stacks every segment straight up from the hip.

Joint angles:

* trunk ``phi`` — degrees from vertical about the hip;
* shoulder ``theta`` — flexion relative to the trunk line;
* elbow ``beta`` — flexion, 0 = straight arm, range [0, 145] deg.

A prosthetic forearm can be mounted at a fixed offset relative to the
joint (``SegmentLengths.elbow_mount_offset``); the effective forearm
direction uses ``beta + offset``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ELBOW_RANGE",
    "SHOULDER_RANGE",
    "SegmentLengths",
    "BodyState",
    "PenPose",
    "Plane",
    "forward_kinematics",
    "jacobians",
    "decompose_velocity",
    "clamp_elbow",
    "reach_radius",
    "reach_phase_offset",
]

ELBOW_RANGE = (0.0, 145.0)  # deg, flexion; commands past the limit are clamped
SHOULDER_RANGE = (-30.0, 120.0)  # deg
CONTACT_THRESHOLD = 0.002  # m, pen-to-plane distance counting as contact

_D2R = math.pi / 180.0


@dataclass(frozen=True)
class SegmentLengths:
    """Link lengths (m) plus the prosthetic forearm mounting offset (deg)."""

    trunk_len: float = 0.50
    upper_arm_len: float = 0.30
    forearm_pen_len: float = 0.35
    elbow_mount_offset: float = 0.0

    def __post_init__(self):
        for name in ("trunk_len", "upper_arm_len", "forearm_pen_len"):
            if not (getattr(self, name) > 0.0):
                raise ValueError(f"{name} must be > 0")


@dataclass(frozen=True)
class BodyState:
    """Joint angles (deg) and the fixed hip position (m) for one instant."""

    trunk_angle: float
    shoulder_angle: float
    elbow_angle: float
    hip_position: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        angles = (self.trunk_angle, self.shoulder_angle, self.elbow_angle)
        if not all(math.isfinite(a) for a in angles):
            raise ValueError("all joint angles must be finite")
        lo, hi = ELBOW_RANGE
        if not (lo <= self.elbow_angle <= hi):
            raise ValueError(
                f"elbow_angle {self.elbow_angle} outside joint range {ELBOW_RANGE}"
            )


@dataclass(frozen=True)
class PenPose:
    """Pen-tip position/velocity in the world frame plus the contact flag."""

    position: tuple[float, float]
    velocity: tuple[float, float] = (0.0, 0.0)
    in_contact: bool = False


@dataclass(frozen=True)
class Plane:
    """Drawing surface seen edge-on in the sagittal plane.

    ``axis`` is the world coordinate whose fixed value defines the
    surface: "z" for a horizontal table (line task), "y" for a vertical
    screen (reaching).  ``axis = None`` models a surface coincident with
    the sagittal plane itself (racetrack whiteboard): distance is always
    zero and the pen is always in contact.
    """

    axis: str | None = "z"
    offset: float = 0.0
    threshold: float = CONTACT_THRESHOLD

    def distance(self, position: tuple[float, float]) -> float:
        if self.axis is None:
            return 0.0
        if self.axis == "z":
            return abs(position[1] - self.offset)
        if self.axis == "y":
            return abs(position[0] - self.offset)
        raise ValueError(f"unknown plane axis {self.axis!r}")

    def contact(self, position: tuple[float, float]) -> bool:
        return self.distance(position) <= self.threshold


def _unit(angle_deg: float) -> tuple[float, float]:
    a = angle_deg * _D2R
    return math.sin(a), math.cos(a)


def _cumulative_angles(body: BodyState, lengths: SegmentLengths) -> tuple[float, float, float]:
    a1 = body.trunk_angle
    a2 = a1 + body.shoulder_angle
    a3 = a2 + body.elbow_angle + lengths.elbow_mount_offset
    return a1, a2, a3


def joint_positions(body: BodyState, lengths: SegmentLengths) -> np.ndarray:
    """Positions of hip, shoulder, elbow, pen as a (4, 2) array (m)."""
    a1, a2, a3 = _cumulative_angles(body, lengths)
    hip = np.asarray(body.hip_position, dtype=float)
    shoulder = hip + lengths.trunk_len * np.array(_unit(a1))
    elbow = shoulder + lengths.upper_arm_len * np.array(_unit(a2))
    pen = elbow + lengths.forearm_pen_len * np.array(_unit(a3))
    return np.vstack([hip, shoulder, elbow, pen])


def forward_kinematics(
    body: BodyState,
    lengths: SegmentLengths,
    joint_rates: tuple[float, float, float] | None = None,
    plane: Plane | None = None,
) -> PenPose:
    """Pen-tip pose for a given posture.

    Args:
        body: joint angles (deg) and hip position.
        lengths: segment geometry.
        joint_rates: optional (trunk, shoulder, elbow) rates in deg/s;
            when given, the pen velocity is J * q_dot.
        plane: optional drawing surface; fills the contact flag.

    Returns:
        PenPose with position (m), velocity (m/s) and contact flag.
    """
    pen = joint_positions(body, lengths)[3]
    if joint_rates is None:
        velocity = (0.0, 0.0)
    else:
        j_human, j_pros = jacobians(body, lengths)
        q_h = np.array(joint_rates[:2], dtype=float) * _D2R
        q_p = joint_rates[2] * _D2R
        v = j_human @ q_h + j_pros[:, 0] * q_p
        velocity = (float(v[0]), float(v[1]))
    position = (float(pen[0]), float(pen[1]))
    in_contact = plane.contact(position) if plane is not None else False
    return PenPose(position=position, velocity=velocity, in_contact=in_contact)


def jacobians(body: BodyState, lengths: SegmentLengths) -> tuple[np.ndarray, np.ndarray]:
    """Pen-tip Jacobians split into human and prosthetic joints.

    Returns:
        (J_human, J_prosthetic): 2x2 matrix for (trunk, shoulder) and
        2x1 matrix for the elbow, both in m/rad.  Pen velocity is
        J_human @ (phi_dot, theta_dot) + J_prosthetic * beta_dot with
        rates in rad/s.
    """
    a1, a2, a3 = _cumulative_angles(body, lengths)
    # d(sin a, cos a)/da = (cos a, -sin a)
    d1 = np.array([math.cos(a1 * _D2R), -math.sin(a1 * _D2R)])
    d2 = np.array([math.cos(a2 * _D2R), -math.sin(a2 * _D2R)])
    d3 = np.array([math.cos(a3 * _D2R), -math.sin(a3 * _D2R)])
    lt, lu, lf = lengths.trunk_len, lengths.upper_arm_len, lengths.forearm_pen_len
    col_trunk = lt * d1 + lu * d2 + lf * d3
    col_shoulder = lu * d2 + lf * d3
    col_elbow = lf * d3
    j_human = np.column_stack([col_trunk, col_shoulder])
    j_pros = col_elbow.reshape(2, 1)
    return j_human, j_pros


def decompose_velocity(
    body: BodyState,
    joint_rates: tuple[float, float, float],
    lengths: SegmentLengths,
) -> tuple[np.ndarray, np.ndarray]:
    """Split pen velocity into human and prosthetic contributions (m/s).

    The two vectors sum to the total pen velocity; rates are deg/s.
    """
    j_human, j_pros = jacobians(body, lengths)
    q_h = np.array(joint_rates[:2], dtype=float) * _D2R
    q_p = joint_rates[2] * _D2R
    return j_human @ q_h, j_pros[:, 0] * q_p


def clamp_elbow(angle: float) -> float:
    lo, hi = ELBOW_RANGE
    return min(hi, max(lo, angle))


def reach_radius(elbow_angle: float, lengths: SegmentLengths) -> float:
    """Shoulder-to-pen distance (m) for a given elbow flexion angle."""
    beta_eff = (elbow_angle + lengths.elbow_mount_offset) * _D2R
    lu, lf = lengths.upper_arm_len, lengths.forearm_pen_len
    return math.sqrt(lu * lu + lf * lf + 2.0 * lu * lf * math.cos(beta_eff))


def reach_phase_offset(elbow_angle: float, lengths: SegmentLengths) -> float:
    """Angle (deg) from the upper-arm direction to the shoulder->pen ray.

    With this, pen = shoulder + reach_radius * unit(phi + theta + offset),
    which is what the analytic shoulder placement inverts.
    """
    beta_eff = (elbow_angle + lengths.elbow_mount_offset) * _D2R
    lu, lf = lengths.upper_arm_len, lengths.forearm_pen_len
    return math.degrees(math.atan2(lf * math.sin(beta_eff), lu + lf * math.cos(beta_eff)))
