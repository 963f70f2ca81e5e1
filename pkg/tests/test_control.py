"""Controller step function: examples, invariants, properties."""

import math

import numpy as np
import pytest

from ceac_lab.control import (
    ControlMode,
    ControllerParams,
    freeze_predicate,
    make_initial_state,
    no_effect_speed,
    step_controller,
    time_constant,
)

TAU = 1.0 / (2.0 * math.pi * 0.1)


def default_params(**kw):
    base = dict(deadzone_zeta=2.0, cutoff_fc=0.1, gain_lambda=3.0, omega_max=50.0)
    base.update(kw)
    return ControllerParams(**base)


def run_sequence(params, trunk_fn, dt, n, calibration=0.0):
    state = make_initial_state(params, calibration)
    commands = []
    for k in range(n):
        state, cmd = step_controller(state, params, trunk_fn((k + 1) * dt), dt)
        commands.append(cmd)
    return state, commands


class TestStepExamples:
    def test_zero_error_inside_deadzone(self):
        params = default_params()
        state = make_initial_state(params, 12.0)
        state, cmd = step_controller(state, params, 12.0, 0.001)
        assert cmd.omega_elbow == 0.0
        assert not cmd.motor_active

    def test_direct_substitution(self):
        # eps = 5, zeta = 2, lambda = 3 -> 9 deg/s; build eps via CCC mode
        params = default_params(mode=ControlMode.CCC, ref_initial=0.0)
        state = make_initial_state(params, 0.0)
        state, cmd = step_controller(state, params, 5.0, 0.001)
        assert cmd.error == pytest.approx(5.0)
        assert cmd.omega_elbow == pytest.approx(9.0)
        assert cmd.motor_active

    def test_saturation_clamp(self):
        params = default_params(mode=ControlMode.CCC, ref_initial=0.0)
        state = make_initial_state(params, 0.0)
        state, cmd = step_controller(state, params, 40.0, 0.001)
        # unsaturated would be 3 * (40 - 2) = 114 deg/s
        assert cmd.omega_elbow == pytest.approx(50.0)

    def test_net_excursion_anchor(self):
        # trunk step of 10 deg, zeta = 0: integrated elbow change = lam*tau*dphi
        params = default_params(deadzone_zeta=0.0, omega_max=1e9)
        state = make_initial_state(params, 0.0)
        dt, total = 1e-3, 0.0
        for _ in range(30_000):
            state, cmd = step_controller(state, params, 10.0, dt)
            total += cmd.omega_elbow * dt
        expected = 3.0 * TAU * 10.0
        assert total == pytest.approx(expected, rel=0.01)

    def test_input_validation(self):
        params = default_params()
        state = make_initial_state(params, 0.0)
        with pytest.raises(ValueError):
            step_controller(state, params, float("nan"), 0.001)
        with pytest.raises(ValueError):
            step_controller(state, params, 1.0, 0.0)
        with pytest.raises(ValueError):
            step_controller(state, params, 1.0, -0.001)
        with pytest.raises(ValueError):
            step_controller(state, params, 1.0, 0.2)


class TestInitialState:
    def test_calibration_capture(self):
        params = default_params(ref_initial=76.0)
        state = make_initial_state(params, 76.0)
        assert state.ref_angle == 76.0
        assert state.last_error == 0.0
        assert not state.frozen and not state.motor_active

    def test_zero_calibration(self):
        state = make_initial_state(default_params(), 0.0)
        assert state.ref_angle == 0.0

    def test_first_step_unchanged_trunk_is_silent(self):
        params = default_params(ref_initial=76.0)
        state = make_initial_state(params, 76.0)
        _, cmd = step_controller(state, params, 76.0, 0.001)
        assert cmd.omega_elbow == 0.0

    def test_nonfinite_calibration_rejected(self):
        with pytest.raises(ValueError):
            make_initial_state(default_params(), float("inf"))


class TestNoEffectSpeed:
    def test_paper_gains(self):
        assert no_effect_speed(default_params()) == pytest.approx(1.2566, abs=1e-4)

    def test_zero_deadzone(self):
        assert no_effect_speed(default_params(deadzone_zeta=0.0)) == 0.0

    def test_doubled_cutoff(self):
        assert no_effect_speed(default_params(cutoff_fc=0.2)) == pytest.approx(2.5133, abs=1e-4)


class TestFreezePredicate:
    def test_boundary_is_active(self):
        params = default_params(ref_initial=5.0)
        state = make_initial_state(params, 5.0)
        assert freeze_predicate(state, params, 5.0) is False

    def test_forward_side_active(self):
        params = default_params(ref_initial=5.0)
        state = make_initial_state(params, 5.0)
        assert freeze_predicate(state, params, 10.0) is False

    def test_backward_side_frozen(self):
        params = default_params(ref_initial=5.0)
        state = make_initial_state(params, 5.0)
        assert freeze_predicate(state, params, 4.0) is True

    def test_inverted_switch(self):
        params = default_params(ref_initial=5.0, freeze_inverted=True)
        state = make_initial_state(params, 5.0)
        assert freeze_predicate(state, params, 4.0) is False
        assert freeze_predicate(state, params, 6.0) is True

    def test_freeze_holds_reference_but_not_command(self):
        params = default_params(ref_initial=0.0)
        state = make_initial_state(params, 0.0)
        # lean backward: candidate reference would cross below 0
        state, cmd = step_controller(state, params, -10.0, 0.01)
        assert state.frozen
        assert state.ref_angle == 0.0
        assert cmd.error == pytest.approx(-10.0)
        assert cmd.omega_elbow == pytest.approx(3.0 * (-10.0 + 2.0))


class TestHighPassResponse:
    @pytest.mark.parametrize("mult", [0.1, 1.0, 10.0])
    def test_amplitude_and_phase(self, mult):
        params = default_params(deadzone_zeta=0.0, omega_max=1e9)
        lam, amp = 3.0, 5.0
        w = mult / TAU
        period = 2 * math.pi / w
        dt = min(1e-3, period / 2000)
        settle = 8 * TAU
        n_periods = 3
        total_t = settle + n_periods * period
        offset = 1.5 * amp  # keep the reference clear of the freeze boundary

        state = make_initial_state(params, 0.0)
        re = im = 0.0
        count = 0
        n = int(total_t / dt)
        for k in range(n):
            t = (k + 1) * dt
            state, cmd = step_controller(state, params, offset + amp * math.sin(w * t), dt)
            if t > settle:
                re += cmd.omega_elbow * math.sin(w * t)
                im += cmd.omega_elbow * math.cos(w * t)
                count += 1
        measured = 2.0 * math.hypot(re, im) / count
        h = complex(0, TAU * w) / complex(1, TAU * w)
        assert measured / amp == pytest.approx(lam * abs(h), rel=0.02)
        # first-order high-pass phase lead: atan2(1, tau*w)
        measured_phase = math.atan2(im, re)
        assert measured_phase == pytest.approx(cmath_phase(h), abs=math.radians(2.0))


def cmath_phase(z):
    return math.atan2(z.imag, z.real)


class TestNetExcursionProperty:
    def test_randomized_minimum_jerk_excursions(self):
        # any rest-to-rest trunk profile: integrated elbow = lam*tau*dphi
        from ceac_lab.pilot import TrunkScript, sample_trunk

        rng = np.random.default_rng(42)
        params = default_params(deadzone_zeta=0.0, omega_max=1e9)
        for _ in range(5):
            n_legs = rng.integers(1, 4)
            t_knots = np.cumsum(rng.uniform(0.8, 2.5, n_legs + 1))
            angles = [0.0] + list(np.cumsum(rng.uniform(1.0, 8.0, n_legs)))
            script = TrunkScript(waypoints=tuple(zip(t_knots, angles)))
            dphi = angles[-1] - angles[0]
            horizon = t_knots[-1] + 10 * TAU
            dt = 2e-3
            state = make_initial_state(params, 0.0)
            total = 0.0
            for k in range(int(horizon / dt)):
                angle, _ = sample_trunk(script, (k + 1) * dt)
                state, cmd = step_controller(state, params, angle, dt)
                total += cmd.omega_elbow * dt
            assert total == pytest.approx(3.0 * TAU * dphi, rel=0.01)


class TestNoEffectRamp:
    def test_ramp_at_threshold_never_moves(self):
        params = default_params()
        v0 = no_effect_speed(params)
        state = make_initial_state(params, 0.0)
        dt = 1e-3
        for k in range(60_000):
            state, cmd = step_controller(state, params, v0 * (k + 1) * dt, dt)
            assert cmd.omega_elbow == 0.0

    def test_faster_ramp_engages_within_5_tau(self):
        params = default_params()
        v = 1.5 * no_effect_speed(params)
        state = make_initial_state(params, 0.0)
        dt = 1e-3
        first = None
        for k in range(int(5 * TAU / dt)):
            t = (k + 1) * dt
            state, cmd = step_controller(state, params, v * t, dt)
            if cmd.omega_elbow != 0.0:
                first = t
                break
        assert first is not None and first < 5 * TAU


class TestDeterminismAndEquivalence:
    def test_bit_identical_repetition(self):
        params = default_params()
        rng = np.random.default_rng(7)
        inputs = rng.uniform(-5, 15, 500)
        dts = rng.uniform(1e-3, 5e-3, 500)

        def run():
            state = make_initial_state(params, 0.0)
            out = []
            for phi, dt in zip(inputs, dts):
                state, cmd = step_controller(state, params, phi, dt)
                out.append(cmd.omega_elbow)
            return out

        assert run() == run()

    def test_ccc_equals_frozen_ceac(self):
        # fc = 0 never moves the reference: command-identical to CCC
        rng = np.random.default_rng(3)
        inputs = rng.uniform(-10, 20, 400)
        pa = default_params(cutoff_fc=0.0, mode=ControlMode.CEAC, ref_initial=2.0)
        pb = default_params(mode=ControlMode.CCC, ref_initial=2.0)
        sa, sb = make_initial_state(pa, 2.0), make_initial_state(pb, 2.0)
        for phi in inputs:
            sa, ca = step_controller(sa, pa, phi, 0.002)
            sb, cb = step_controller(sb, pb, phi, 0.002)
            assert ca.omega_elbow == cb.omega_elbow
            assert ca.error == cb.error

    def test_discretization_consistency(self):
        # halving dt changes commands by < 0.1% of lambda * amplitude
        params = default_params(deadzone_zeta=0.0, omega_max=1e9)
        amp, w = 5.0, 2.0 * math.pi * 0.5
        offset = 2 * amp

        def run(dt, n):
            state = make_initial_state(params, 0.0)
            cmds = []
            for k in range(n):
                t = (k + 1) * dt
                state, cmd = step_controller(state, params, offset + amp * math.sin(w * t), dt)
                cmds.append(cmd.omega_elbow)
            return cmds

        coarse = run(2e-3, 5000)
        fine = run(1e-3, 10000)
        diffs = [abs(c - fine[2 * i + 1]) for i, c in enumerate(coarse)]
        assert max(diffs) < 1e-3 * 3.0 * amp


class TestParamValidation:
    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            ControllerParams(deadzone_zeta=-1.0)
        with pytest.raises(ValueError):
            ControllerParams(cutoff_fc=-0.1)
        with pytest.raises(ValueError):
            ControllerParams(gain_lambda=0.0)
        with pytest.raises(ValueError):
            ControllerParams(omega_max=0.0)

    def test_time_constant(self):
        assert time_constant(default_params()) == pytest.approx(TAU)
        assert math.isinf(time_constant(default_params(cutoff_fc=0.0)))
