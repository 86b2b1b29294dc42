import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aerodock import dynamics as dyn

finite = st.floats(-5.0, 5.0, allow_nan=False)
vec3 = st.tuples(finite, finite, finite).map(np.array)


def hover(mass=0.7):
    return dyn.invert_dynamics(np.zeros(3), 0.0, mass)


def test_linear_model_block_structure():
    lm = dyn.linear_model(0.7)
    expected = np.zeros((7, 7))
    expected[0, 3] = expected[1, 4] = expected[2, 5] = 1.0
    np.testing.assert_array_equal(lm.A, expected)
    np.testing.assert_array_equal(lm.C, np.eye(7))
    np.testing.assert_array_equal(lm.B_bar.T @ lm.B_bar, np.eye(3))
    np.testing.assert_array_equal(lm.B[0:6, 0:3], lm.B_bar)
    assert lm.B[6, 3] == 1.0


@pytest.mark.parametrize("m", [0.0, -1.0])
def test_linear_model_rejects_bad_mass(m):
    with pytest.raises(dyn.InvalidParameterError):
        dyn.linear_model(m)


def test_hover_inversion():
    cmd = hover()
    assert cmd.thrust == pytest.approx(0.7 * 9.81, abs=1e-12)
    np.testing.assert_allclose(cmd.R_des, np.eye(3), atol=1e-12)
    cmd = dyn.invert_dynamics(np.zeros(3), 0.8, 0.7)
    np.testing.assert_allclose(cmd.R_des, dyn.rot_z(0.8), atol=1e-12)


def test_forward_tilt_inversion():
    cmd = dyn.invert_dynamics(np.array([2.0, 0.0, 0.0]), 0.0, 0.7)
    assert cmd.thrust == pytest.approx(0.7 * math.sqrt(4.0 + 9.81 ** 2), abs=1e-12)
    assert cmd.thrust == pytest.approx(7.009, abs=1e-3)
    roll, pitch, yaw = dyn.euler_zyx(cmd.R_des)
    assert abs(pitch) == pytest.approx(math.atan2(2.0, 9.81), abs=1e-12)
    assert abs(pitch) == pytest.approx(0.2013, abs=5e-4)
    # nose-down pitch (negative in ZYX) to accelerate north
    assert pitch < 0.0
    assert roll == pytest.approx(0.0, abs=1e-12) and yaw == pytest.approx(0.0, abs=1e-12)


def test_free_fall_command_saturates():
    cmd = dyn.invert_dynamics(np.array([0.0, 0.0, 9.81]), 0.0, 0.7)
    assert cmd.saturated
    assert cmd.thrust == pytest.approx(0.7 * dyn.EPS_THRUST)


@given(vec3, st.floats(-math.pi, math.pi))
def test_inversion_round_trip(a, yaw):
    if np.linalg.norm(dyn.G * np.array([0, 0, 1.0]) - a) <= dyn.EPS_THRUST:
        return
    cmd = dyn.invert_dynamics(a, yaw, 0.7)
    s = dyn.VehicleState(np.zeros(3), np.zeros(3), cmd.R_des, 0.7)
    np.testing.assert_allclose(dyn.acceleration(s, cmd, np.zeros(3)), a, atol=1e-9)
    R = cmd.R_des
    np.testing.assert_allclose(R.T @ R, np.eye(3), atol=1e-12)
    assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-12)


def test_converged_step_round_trip():
    a = np.array([1.0, -0.5, -2.0])
    cmd = dyn.invert_dynamics(a, 0.3, 0.7)
    s = dyn.VehicleState(np.zeros(3), np.zeros(3), cmd.R_des, 0.7)
    s2 = dyn.step(s, cmd, np.zeros(3), 0.002)
    np.testing.assert_allclose((s2.v - s.v) / 0.002, a, atol=1e-9)


def test_hover_equilibrium():
    s = dyn.VehicleState.at_rest([0.0, 0.0, -2.5])
    s2 = dyn.step(s, hover(), np.zeros(3), 0.002)
    assert np.linalg.norm(s2.v - s.v) < 1e-12


def test_external_force_one_step():
    s = dyn.VehicleState.at_rest([0.0, 0.0, -2.5])
    s2 = dyn.step(s, hover(), np.array([0.0, 0.0, 3.0]), 0.002)
    assert s2.v[2] - s.v[2] == pytest.approx(0.006, abs=1e-12)


def _integrate(dt, T=1.0):
    cmd = dyn.invert_dynamics(np.array([1.5, -1.0, 0.0]), 0.0, 0.7)
    s = dyn.VehicleState.at_rest(np.zeros(3))
    for _ in range(int(round(T / dt))):
        s = dyn.step(s, cmd, np.zeros(3), dt)
    return s


def test_tilt_command_matches_fine_step():
    coarse, fine = _integrate(0.002), _integrate(0.0002)
    assert np.max(np.abs(coarse.p - fine.p)) < 1e-4


def test_ballistic_fall():
    # thrust pinned at the saturation floor: constant acceleration, integrated exactly
    cmd = dyn.InnerLoopCommand(np.eye(3), 0.0)
    s = dyn.VehicleState.at_rest(np.zeros(3))
    dt, n = 0.002, 500
    for _ in range(n):
        s = dyn.step(s, cmd, np.zeros(3), dt)
    t = n * dt
    assert s.p[2] == pytest.approx(0.5 * 9.81 * t * t, rel=1e-12)
    assert s.v[2] == pytest.approx(9.81 * t, rel=1e-12)


@given(st.lists(vec3, min_size=1, max_size=40))
def test_attitude_stays_orthonormal(cmds):
    s = dyn.VehicleState.at_rest(np.zeros(3))
    for a in cmds:
        cmd = dyn.invert_dynamics(a, float(a[0]), 0.7)
        s = dyn.step(s, cmd, np.zeros(3), 0.002)
        assert np.max(np.abs(s.R.T @ s.R - np.eye(3))) < 1e-9
        assert np.linalg.det(s.R) == pytest.approx(1.0, abs=1e-9)


def test_step_is_deterministic():
    cmd = dyn.invert_dynamics(np.array([0.3, 0.1, -0.2]), 0.1, 0.7)
    s = dyn.VehicleState.at_rest(np.zeros(3))
    a = dyn.step(s, cmd, np.array([0.1, 0.2, 0.3]), 0.002)
    b = dyn.step(s, cmd, np.array([0.1, 0.2, 0.3]), 0.002)
    assert a.p.tobytes() == b.p.tobytes() and a.R.tobytes() == b.R.tobytes()


@pytest.mark.parametrize("dt", [0.0, -0.001, 0.02])
def test_step_rejects_bad_dt(dt):
    with pytest.raises(dyn.InvalidParameterError):
        dyn.step(dyn.VehicleState.at_rest(np.zeros(3)), hover(), np.zeros(3), dt)


def test_step_rejects_nan():
    with pytest.raises(dyn.SimulationFault):
        dyn.step(dyn.VehicleState.at_rest(np.zeros(3)), hover(), np.array([np.nan, 0, 0]), 0.002)
    with pytest.raises(dyn.SimulationFault):
        dyn.invert_dynamics(np.array([np.nan, 0, 0]), 0.0, 0.7)


def test_attitude_relaxes_with_time_constant():
    cmd = dyn.invert_dynamics(np.array([3.0, 0.0, 0.0]), 0.0, 0.7)
    s = dyn.VehicleState.at_rest(np.zeros(3))
    target = math.acos(cmd.R_des[2, 2])
    for _ in range(25):  # one time constant at 500 Hz
        s = dyn.step(s, cmd, np.zeros(3), 0.002)
    tilt = math.acos(min(1.0, s.R[2, 2]))
    assert tilt / target == pytest.approx(1.0 - math.exp(-1.0), abs=1e-3)
