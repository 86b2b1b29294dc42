import math

import numpy as np
import pytest

from aerodock import docking as dk
from aerodock.dynamics import InvalidParameterError, VehicleState

LEADER = VehicleState.at_rest([0.0, 0.0, -2.5])
DT = 0.002


def _swing(theta0, T, zeta=0.0, d_p=0.36):
    plat = dk.PlatformState(d_p, d_p * np.array([math.sin(theta0), 0.0, math.cos(theta0)]),
                            np.zeros(3), damping_ratio=zeta)
    xs = []
    for _ in range(int(round(T / DT))):
        plat = dk.platform_step(LEADER, plat, DT)
        xs.append(plat.q.copy())
    return np.array(xs)


def test_platform_rests_below_anchor():
    plat = dk.platform_at_rest(0.36)
    for _ in range(500):
        plat = dk.platform_step(LEADER, plat, DT)
    np.testing.assert_allclose(plat.bar_position(LEADER), [0.0, 0.0, -2.14], atol=1e-12)


def test_pendulum_period():
    x = _swing(0.05, 6.0)[:, 0]
    t = np.arange(1, len(x) + 1) * DT
    up = np.where((x[:-1] < 0.0) & (x[1:] >= 0.0))[0]
    # interpolate the upward zero crossings
    tc = t[up] + (0.0 - x[up]) / (x[up + 1] - x[up]) * DT
    period = float(np.mean(np.diff(tc)))
    assert period == pytest.approx(2 * math.pi * math.sqrt(0.36 / 9.81), rel=0.02)


def test_damping_shrinks_amplitude():
    x = _swing(0.1, 8.0, zeta=0.05)[:, 0]
    per = int(round(1.204 / DT))
    peaks = [np.max(np.abs(x[k:k + per])) for k in range(0, len(x) - per, per)]
    assert all(b <= a + 1e-12 for a, b in zip(peaks, peaks[1:]))
    assert peaks[-1] < 0.5 * peaks[0]


def test_cable_length_preserved():
    q = _swing(0.4, 3.0, zeta=0.05)
    assert np.max(np.abs(np.linalg.norm(q, axis=1) - 0.36)) < 1e-9


def test_platform_bad_inputs():
    with pytest.raises(InvalidParameterError):
        dk.platform_at_rest(0.0)
    with pytest.raises(InvalidParameterError):
        dk.platform_step(LEADER, dk.platform_at_rest(0.36), 0.0)


def test_bar_closest_point_clamps_to_segment():
    plat = dk.platform_at_rest(0.36)
    c = plat.bar_position(LEADER)
    np.testing.assert_allclose(plat.closest_point(LEADER, c + [0.0, 0.05, 0.1]), c + [0, 0.05, 0])
    np.testing.assert_allclose(plat.closest_point(LEADER, c + [0.0, 1.0, 0.0]), c + [0, 0.1, 0])


def _run_gripper(rel_pos_fn, rel_vel, T=0.3, t0=0.0):
    grip = dk.GripperState()
    events = []
    n = int(round(T / DT))
    for k in range(1, n + 1):
        t = t0 + k * DT
        grip, ev = dk.gripper_step(grip, rel_pos_fn(t), rel_vel, t, DT)
        if ev is not None:
            events.append(ev)
    return grip, events


def test_gripper_docks_on_schedule():
    # bar arrives at the tip at t = 0.1 and stays
    pos = lambda t: np.zeros(3) if t >= 0.1 - 1e-12 else np.array([0.0, 0.0, 0.05])
    grip, events = _run_gripper(pos, np.zeros(3))
    kinds = [e.type for e in events]
    assert kinds == ["contact", "docked"]
    t_contact = events[0].t
    assert events[1].t == pytest.approx(t_contact + 0.015 + 0.06, abs=1e-12)
    assert grip.gate is dk.Gate.CLOSED


def test_gripper_misses_fast_crossing():
    # 2 m/s vertical crossing: the bar leaves the 0.1 m aperture after 0.05 s
    v = 2.0
    pos = lambda t: np.array([0.0, 0.0, -0.03 + v * (t - 0.0)])
    grip, events = _run_gripper(pos, np.array([0.0, 0.0, v]), T=0.3)
    assert [e.type for e in events] == ["contact", "missed"]
    assert 0.1 / v < 0.015 + 0.06


def test_gripper_no_contact():
    grip, events = _run_gripper(lambda t: np.array([0.0, 0.0, 0.5]), np.zeros(3))
    assert events == [] and grip.gate is dk.Gate.OPEN


def test_gripper_commanded_close_has_no_latency():
    grip = dk.GripperState()
    grip, ev = dk.gripper_step(grip, np.array([0.0, 0.0, 0.05]), np.zeros(3), 1.0, DT, command_close=True)
    assert grip.gate is dk.Gate.CLOSING and grip.close_start == 1.0


def test_dock_state_machine():
    s = dk.DockState()
    s = s.advance(dk.DockPhase.CONTACT_PENDING, 1.0).advance(dk.DockPhase.DOCKED, 1.1)
    assert s.resolved and s.time_of(dk.DockPhase.DOCKED) == 1.1
    with pytest.raises(ValueError):
        s.advance(dk.DockPhase.MISSED, 2.0)
    with pytest.raises(ValueError):
        dk.DockState().advance(dk.DockPhase.DOCKED, 0.0)


def test_events_drive_state_machine():
    ev = dk.GripperEvent(0.5, "contact", (0, 0, 0), (0, 0, 0))
    s = dk.on_gripper_event(dk.DockState(), ev)
    assert s.phase is dk.DockPhase.CONTACT_PENDING
    s = dk.on_gripper_event(s, dk.GripperEvent(0.575, "missed", (0, 0, 0.2), (0, 0, 0)))
    assert s.phase is dk.DockPhase.MISSED
    assert dk.on_gripper_event(s, None) is s


def test_coupling_ramp():
    bravo = VehicleState.at_rest(np.zeros(3))
    c0 = dk.couple_on_dock(LEADER, bravo, t_since_dock=0.0)
    assert c0.thrust_fraction == 1.0
    np.testing.assert_array_equal(c0.leader_load, np.zeros(3))
    c1 = dk.couple_on_dock(LEADER, bravo, t_since_dock=1.0)
    assert c1.leader_load[2] == pytest.approx(0.7 * 9.81, abs=1e-12)
    assert c1.leader_load[2] == pytest.approx(6.867, abs=1e-9)
    assert c1.follower_thrust == 0.0
    with pytest.raises(InvalidParameterError):
        dk.couple_on_dock(LEADER, bravo, t_since_dock=-0.1)
