"""Walkthrough of the controller step function and its closed-form behavior.

Four short experiments on the bare controller, no arm model involved:
the step response and the net-excursion law, the no-effect trunk speed,
the high-pass frequency response, and the freeze rule.
"""

import math

from ceac_lab import (
    ControlMode,
    ControllerParams,
    make_initial_state,
    no_effect_speed,
    step_controller,
    time_constant,
)

params = ControllerParams(deadzone_zeta=2.0, cutoff_fc=0.1, gain_lambda=3.0)
tau = time_constant(params)
print(f"gains: zeta={params.deadzone_zeta} deg, fc={params.cutoff_fc} Hz "
      f"(tau={tau:.3f} s), lambda={params.gain_lambda} 1/s")

# --- 1. step response: the integrated elbow motion depends only on the
# net trunk excursion (lambda * tau * dphi), not on how fast you lean ----
print("\n1) net-excursion law: integrated elbow change for a 10 deg step")
p0 = ControllerParams(deadzone_zeta=0.0, cutoff_fc=0.1, gain_lambda=3.0, omega_max=1e9)
state = make_initial_state(p0, 0.0)
dt, total = 1e-3, 0.0
for _ in range(30_000):
    state, cmd = step_controller(state, p0, 10.0, dt)
    total += cmd.omega_elbow * dt
print(f"   integrated: {total:.3f} deg   analytic lambda*tau*dphi: {3*tau*10:.3f} deg")

# --- 2. the no-effect speed: trunk repositioning below 2*pi*fc*zeta never
# engages the elbow --------------------------------------------------------
v0 = no_effect_speed(params)
print(f"\n2) no-effect speed: {v0:.4f} deg/s")
for mult in (0.95, 1.5):
    state = make_initial_state(params, 0.0)
    first = None
    for k in range(40_000):
        t = (k + 1) * dt
        state, cmd = step_controller(state, params, mult * v0 * t, dt)
        if cmd.omega_elbow != 0.0:
            first = t
            break
    label = "never moved" if first is None else f"moved at t={first:.2f} s"
    print(f"   ramp at {mult:.2f} x threshold: {label}")

# --- 3. frequency response: trunk position to elbow velocity is a
# first-order high-pass lambda * tau*s / (1 + tau*s) ------------------------
print("\n3) high-pass response (measured vs analytic gain)")
for mult in (0.1, 1.0, 10.0):
    w = mult / tau
    period = 2 * math.pi / w
    state = make_initial_state(p0, 0.0)
    re = im = count = 0
    step = min(1e-3, period / 2000)
    for k in range(int((8 * tau + 3 * period) / step)):
        t = (k + 1) * step
        state, cmd = step_controller(state, p0, 7.5 + 5.0 * math.sin(w * t), step)
        if t > 8 * tau:
            re += cmd.omega_elbow * math.sin(w * t)
            im += cmd.omega_elbow * math.cos(w * t)
            count += 1
    gain = 2 * math.hypot(re, im) / count / 5.0
    analytic = 3.0 * abs(complex(0, tau * w) / complex(1, tau * w))
    print(f"   w = {mult:>4} / tau: measured {gain:.4f}   analytic {analytic:.4f}  (1/s)")

# --- 4. the freeze rule: leaning backward of the calibration posture
# pauses the reference but keeps commanding the elbow -----------------------
print("\n4) freeze rule: a backward lean against the held reference")
state = make_initial_state(params, 0.0)
for phi in (5.0, 5.0, -6.0, -6.0):
    state, cmd = step_controller(state, params, phi, 0.05)
    print(f"   phi={phi:+.1f}  ref={state.ref_angle:+.3f}  eps={cmd.error:+.3f}  "
          f"omega={cmd.omega_elbow:+.2f}  frozen={state.frozen}")

# CCC for contrast: the reference never moves at all
print("\n   CCC baseline on the same inputs:")
pc = ControllerParams(mode=ControlMode.CCC)
state = make_initial_state(pc, 0.0)
for phi in (5.0, 5.0, -6.0, -6.0):
    state, cmd = step_controller(state, pc, phi, 0.05)
    print(f"   phi={phi:+.1f}  ref={state.ref_angle:+.3f}  omega={cmd.omega_elbow:+.2f}")
