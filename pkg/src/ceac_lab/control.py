"""Trunk-to-elbow velocity control laws.

Two controllers share one step function:

* CEAC — the reference posture is a first-order low-pass of the actual
  trunk angle (time constant tau = 1/(2*pi*fc)), so it trails the trunk
  with a controlled delay.  The tracking error drives elbow velocity
  through a deadzone-proportional law.  Reference updates are paused
  whenever the updated reference would cross backward of the initial
  upright posture.
* CCC — identical deadzone-proportional law, but the reference is frozen
  at the calibration posture forever, so every trunk deviation counts as
  error.

Sign conventions (used across the whole package):

* Trunk flexion (forward lean) is positive displacement from upright.
* Positive elbow command means extension; the simulation loop integrates
  the flexion angle as ``beta -= omega * dt``.
* All public angles are degrees; the gain ``lambda`` is 1/s, so degree
  inputs yield deg/s outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

__all__ = [
    "ControlMode",
    "ControllerParams",
    "ControllerState",
    "ControlCommand",
    "make_initial_state",
    "step_controller",
    "freeze_predicate",
    "no_effect_speed",
    "time_constant",
]

MAX_STEP_DT = 0.1  # s; controller steps longer than this are rejected


class ControlMode(str, Enum):
    CEAC = "ceac"
    CCC = "ccc"


@dataclass(frozen=True)
class ControllerParams:
    """Gain set for the trunk-driven elbow velocity controller.

    Attributes:
        deadzone_zeta: error band (deg) inside which the elbow command is
            zero; rejects postural sway.
        cutoff_fc: reference low-pass cutoff (Hz).  0 disables reference
            motion entirely (degenerates to CCC behaviour).
        gain_lambda: proportional gain (1/s) from error to elbow velocity.
        ref_initial: calibration trunk angle (deg) captured at setup; the
            freeze boundary, and the permanent reference in CCC mode.
        omega_max: actuator velocity saturation (deg/s), applied
            symmetrically after the deadzone law.
        mode: CEAC (dynamic reference) or CCC (fixed reference).
        freeze_inverted: sensitivity switch flipping the freeze-rule
            inequality (freeze on the forward side instead of backward).
    """

    deadzone_zeta: float = 2.0
    cutoff_fc: float = 0.1
    gain_lambda: float = 3.0
    ref_initial: float = 0.0
    omega_max: float = 50.0
    mode: ControlMode = ControlMode.CEAC
    freeze_inverted: bool = False

    def __post_init__(self):
        if not (self.deadzone_zeta >= 0.0):
            raise ValueError(f"deadzone_zeta must be >= 0, got {self.deadzone_zeta}")
        if not (self.cutoff_fc >= 0.0):
            raise ValueError(f"cutoff_fc must be >= 0, got {self.cutoff_fc}")
        if not (self.gain_lambda > 0.0):
            raise ValueError(f"gain_lambda must be > 0, got {self.gain_lambda}")
        if not (self.omega_max > 0.0):
            raise ValueError(f"omega_max must be > 0, got {self.omega_max}")
        if not math.isfinite(self.ref_initial):
            raise ValueError("ref_initial must be finite")


@dataclass(frozen=True)
class ControllerState:
    """Evolving controller state: the reference angle plus step flags."""

    ref_angle: float
    frozen: bool = False
    last_error: float = 0.0
    motor_active: bool = False


@dataclass(frozen=True)
class ControlCommand:
    """Output of one controller step."""

    omega_elbow: float  # deg/s, positive = extension, |.| <= omega_max
    error: float  # deg
    ref_angle: float  # deg, post-update reference
    motor_active: bool


def time_constant(params: ControllerParams) -> float:
    """Reference low-pass time constant tau = 1/(2*pi*fc), inf if fc = 0."""
    if params.cutoff_fc == 0.0:
        return math.inf
    return 1.0 / (2.0 * math.pi * params.cutoff_fc)


def no_effect_speed(params: ControllerParams) -> float:
    """Maximum trunk speed (deg/s) that never engages the elbow.

    A constant-speed trunk ramp settles to a steady tracking error of
    tau * speed; the elbow stays silent while that error is <= zeta,
    which bounds the speed by 2*pi*fc*zeta.
    """
    return 2.0 * math.pi * params.cutoff_fc * params.deadzone_zeta


def make_initial_state(params: ControllerParams, calibration_trunk_angle: float) -> ControllerState:
    """Capture the calibration posture as the starting reference.

    The returned state has zero error and an inactive motor; in CEAC
    mode the caller normally builds ``params`` with ``ref_initial``
    equal to the same calibration angle so the freeze boundary matches.
    """
    if not math.isfinite(calibration_trunk_angle):
        raise ValueError("calibration_trunk_angle must be finite")
    return ControllerState(
        ref_angle=float(calibration_trunk_angle),
        frozen=False,
        last_error=0.0,
        motor_active=False,
    )


def freeze_predicate(state: ControllerState, params: ControllerParams, candidate_ref: float) -> bool:
    """True when the reference update must be paused this step.

    The update is paused exactly when the candidate reference lies
    strictly on the backward-lean side of the calibration posture
    (forward flexion positive); the boundary itself stays active.
    Backward lean is treated as compensatory rather than functional.
    ``freeze_inverted`` flips the side for sensitivity checks.
    Only meaningful in CEAC mode; CCC has no dynamic reference.
    """
    if params.mode is ControlMode.CCC:
        return False
    if params.freeze_inverted:
        return candidate_ref > params.ref_initial
    return candidate_ref < params.ref_initial


def _deadzone_velocity(error: float, params: ControllerParams) -> float:
    zeta = params.deadzone_zeta
    if abs(error) <= zeta:
        return 0.0
    omega = params.gain_lambda * (error - math.copysign(zeta, error))
    return max(-params.omega_max, min(params.omega_max, omega))


def step_controller(
    state: ControllerState,
    params: ControllerParams,
    trunk_angle: float,
    dt: float,
) -> tuple[ControllerState, ControlCommand]:
    """Advance the controller by one fixed step.

    The reference update is the exact zero-order-hold discretization of
    the first-order low-pass (ref += (1 - exp(-dt/tau)) * (trunk - ref)),
    which is unconditionally stable and exact for piecewise-constant
    input.  The error and command are computed from the post-update
    reference; while frozen the reference holds but the error and
    command are still produced, so leaning back against a held
    reference still flexes the elbow.

    Args:
        state: controller state from the previous step (or
            :func:`make_initial_state`).
        params: gain set; ``params.mode`` selects CEAC or CCC.
        trunk_angle: measured trunk flexion (deg, forward positive).
        dt: step duration (s), 0 < dt <= 0.1.

    Returns:
        (new_state, command) — the state carries the post-update
        reference; the command's velocity is clamped to +-omega_max.

    Raises:
        ValueError: non-finite trunk angle, or dt outside (0, 0.1].
    """
    if not math.isfinite(trunk_angle):
        raise ValueError(f"trunk_angle must be finite, got {trunk_angle}")
    if not (0.0 < dt <= MAX_STEP_DT):
        raise ValueError(f"dt must be in (0, {MAX_STEP_DT}] s, got {dt}")

    if params.mode is ControlMode.CCC:
        ref = params.ref_initial
        frozen = False
    else:
        tau = time_constant(params)
        alpha = 0.0 if math.isinf(tau) else 1.0 - math.exp(-dt / tau)
        candidate = state.ref_angle + alpha * (trunk_angle - state.ref_angle)
        frozen = freeze_predicate(state, params, candidate)
        ref = state.ref_angle if frozen else candidate

    error = trunk_angle - ref
    omega = _deadzone_velocity(error, params)
    motor_active = abs(error) > params.deadzone_zeta

    new_state = replace(
        state,
        ref_angle=ref,
        frozen=frozen,
        last_error=error,
        motor_active=motor_active,
    )
    command = ControlCommand(
        omega_elbow=omega,
        error=error,
        ref_angle=ref,
        motor_active=motor_active,
    )
    return new_state, command
