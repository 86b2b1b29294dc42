"""Minimum-jerk approach trajectories and the formation-hold reference."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .dynamics import InvalidParameterError


class HoldMode(enum.Enum):
    HOLD_POINT = "point"
    TRACK_LEADER = "leader"


@dataclass(frozen=True)
class BoundaryState:
    p: np.ndarray
    v: np.ndarray = field(default_factory=lambda: np.zeros(3))
    a: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @classmethod
    def rest(cls, p) -> "BoundaryState":
        return cls(np.asarray(p, dtype=float))


@dataclass(frozen=True)
class Reference:
    p: np.ndarray
    v: np.ndarray
    a: np.ndarray
    yaw: float = 0.0

    @property
    def x(self) -> np.ndarray:
        return np.concatenate((self.p, self.v, [self.yaw]))


@dataclass(frozen=True)
class QuinticTrajectory:
    coeffs: np.ndarray  # (3, 6), ascending powers of (t - t0)
    t0: float
    t_h: float
    hold_mode: HoldMode
    goal: BoundaryState
    yaw: float = 0.0

    @property
    def t_end(self) -> float:
        return self.t0 + self.t_h


def quintic_coefficients(p0, v0, a0, p1, v1, a1, T):
    """Ascending coefficients of the quintic meeting p/v/a at 0 and ``T``."""
    d = p1 - p0
    c3 = (20.0 * d - (8.0 * v1 + 12.0 * v0) * T - (3.0 * a0 - a1) * T ** 2) / (2.0 * T ** 3)
    c4 = (-30.0 * d + (14.0 * v1 + 16.0 * v0) * T + (3.0 * a0 - 2.0 * a1) * T ** 2) / (2.0 * T ** 4)
    c5 = (12.0 * d - 6.0 * (v1 + v0) * T + (a1 - a0) * T ** 2) / (2.0 * T ** 5)
    return np.stack([np.asarray(p0, dtype=float), np.asarray(v0, dtype=float),
                     0.5 * np.asarray(a0, dtype=float), c3, c4, c5], axis=-1)


def plan(start: BoundaryState, goal: BoundaryState, t_h: float,
         hold_mode: HoldMode = HoldMode.HOLD_POINT, t0: float = 0.0,
         yaw: float = 0.0) -> QuinticTrajectory:
    if not t_h > 0.0:
        raise InvalidParameterError(f"horizon must be positive, got {t_h!r}")
    C = quintic_coefficients(start.p, start.v, start.a, goal.p, goal.v, goal.a, t_h)
    return QuinticTrajectory(coeffs=C, t0=t0, t_h=t_h, hold_mode=HoldMode(hold_mode),
                             goal=goal, yaw=yaw)


def _eval(C, s):
    powers = s ** np.arange(6)
    p = C @ powers
    v = C[:, 1:] @ (np.arange(1, 6) * powers[:5])
    a = C[:, 2:] @ (np.array([2.0, 6.0, 12.0, 20.0]) * powers[:4])
    return p, v, a


def sample(traj: QuinticTrajectory, t: float) -> Reference:
    """Reference at time ``t``; times before ``t0`` are clamped."""
    s = max(t, traj.t0) - traj.t0
    if s <= traj.t_h * (1.0 + 1e-12):  # absorb rounding in t0 + t_h - t0
        p, v, a = _eval(traj.coeffs, min(s, traj.t_h))
        return Reference(p, v, a, traj.yaw)
    if traj.hold_mode is HoldMode.TRACK_LEADER:
        dt = s - traj.t_h
        return Reference(traj.goal.p + traj.goal.v * dt, traj.goal.v.copy(), np.zeros(3), traj.yaw)
    return Reference(traj.goal.p.copy(), np.zeros(3), np.zeros(3), traj.yaw)


def predict_platform(leader_p, leader_v, t_now: float, t_meet: float, d_p: float,
                     gripper_offset=None, attach_offset=None) -> BoundaryState:
    """Follower-centre goal that puts the gripper tip on the bar at ``t_meet``.

    The leader is extrapolated at constant velocity; the bar is assumed at
    rest ``d_p`` below its anchor.
    """
    if not t_meet > t_now:
        raise InvalidParameterError("meeting time must lie in the future")
    tip = np.zeros(3) if gripper_offset is None else np.asarray(gripper_offset, dtype=float)
    attach = np.zeros(3) if attach_offset is None else np.asarray(attach_offset, dtype=float)
    leader_v = np.asarray(leader_v, dtype=float)
    p = np.asarray(leader_p, dtype=float) + leader_v * (t_meet - t_now) + attach
    p = p + np.array([0.0, 0.0, d_p]) - tip
    return BoundaryState(p=p, v=leader_v.copy(), a=np.zeros(3))
