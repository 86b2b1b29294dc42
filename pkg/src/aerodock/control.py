"""LQR tracking control, downwash compensation and a disturbance observer.

The linear model decouples into three double integrators (north, east,
down) and a single integrator (yaw), so the Riccati solution is assembled
from per-axis closed forms. :func:`solve_care_kleinman` solves the dense
problem by Newton iteration and is kept as an independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .dynamics import InvalidParameterError, LinearModel

A_MAX = 8.0


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    a = math.fmod(a + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


@dataclass(frozen=True)
class LqrWeights:
    q_p: tuple = (8.0, 8.0, 8.0)
    q_v: tuple = (4.0, 4.0, 4.0)
    q_yaw: float = 2.0
    r_a: tuple = (1.0, 1.0, 1.0)
    r_yaw: float = 1.0

    def __post_init__(self):
        vals = [*self.q_p, *self.q_v, self.q_yaw, *self.r_a, self.r_yaw]
        if len(self.q_p) != 3 or len(self.q_v) != 3 or len(self.r_a) != 3:
            raise InvalidParameterError("per-axis weights need three entries")
        if not all(v > 0.0 for v in vals):
            raise InvalidParameterError("LQR weights must be strictly positive")

    @property
    def Q(self) -> np.ndarray:
        return np.diag([*self.q_p, *self.q_v, self.q_yaw])

    @property
    def R(self) -> np.ndarray:
        return np.diag([*self.r_a, self.r_yaw])

    def to_dict(self) -> dict:
        return {"q_p": list(self.q_p), "q_v": list(self.q_v), "q_yaw": self.q_yaw,
                "r_a": list(self.r_a), "r_yaw": self.r_yaw}

    @classmethod
    def from_dict(cls, d: dict) -> "LqrWeights":
        d = dict(d)
        for k in ("q_p", "q_v", "r_a"):
            if k in d:
                d[k] = tuple(float(x) for x in d[k])
        return cls(**d)


@dataclass(frozen=True)
class GainMatrix:
    K: np.ndarray
    P: np.ndarray


def double_integrator_care(q_p: float, q_v: float, r: float) -> np.ndarray:
    """Closed-form 2x2 Riccati solution for ``p'' = u``."""
    p12 = math.sqrt(q_p * r)
    p22 = math.sqrt(r * (q_v + 2.0 * p12))
    p11 = p12 * p22 / r
    return np.array([[p11, p12], [p12, p22]])


def axis_gains(q_p: float, q_v: float, r: float) -> tuple[float, float]:
    """``(k_p, k_v)`` of the double-integrator LQR."""
    P = double_integrator_care(q_p, q_v, r)
    return P[0, 1] / r, P[1, 1] / r


def solve_lqr(weights: LqrWeights, model: LinearModel) -> GainMatrix:
    """Infinite-horizon LQR gain for the decoupled model, axis by axis."""
    P = np.zeros((7, 7))
    for i in range(3):
        Pi = double_integrator_care(weights.q_p[i], weights.q_v[i], weights.r_a[i])
        P[i, i] = Pi[0, 0]
        P[i, 3 + i] = P[3 + i, i] = Pi[0, 1]
        P[3 + i, 3 + i] = Pi[1, 1]
    P[6, 6] = math.sqrt(weights.q_yaw * weights.r_yaw)
    K = np.linalg.solve(weights.R, model.B.T @ P)
    return GainMatrix(K=K, P=P)


def riccati_residual(P, A, B, Q, R) -> float:
    res = A.T @ P + P @ A - P @ B @ np.linalg.solve(R, B.T @ P) + Q
    return float(np.max(np.abs(res)))


def solve_care_kleinman(A, B, Q, R, K0=None, tol: float = 1e-13, max_iter: int = 100):
    """Kleinman-Newton iteration for the CARE.

    ``K0`` must stabilize ``A - B K0``; the default is a unit-bandwidth
    PD gain per axis which stabilizes the docking model.
    """
    n, m = B.shape
    if K0 is None:
        K0 = np.zeros((m, n))
        K0[0:3, 0:3] = np.eye(3)
        K0[0:3, 3:6] = 2.0 * np.eye(3)
        K0[3, 6] = 1.0
    K = np.asarray(K0, dtype=float)
    P = None
    for _ in range(max_iter):
        Acl = A - B @ K
        P_new = scipy.linalg.solve_continuous_lyapunov(Acl.T, -(Q + K.T @ R @ K))
        P_new = 0.5 * (P_new + P_new.T)
        K = np.linalg.solve(R, B.T @ P_new)
        if P is not None and np.max(np.abs(P_new - P)) <= tol * max(1.0, np.max(np.abs(P_new))):
            P = P_new
            break
        P = P_new
    return P, K


@dataclass(frozen=True)
class ControlInput:
    a: np.ndarray
    yaw_rate: float = 0.0


def saturate(a, a_max: float = A_MAX) -> np.ndarray:
    return np.clip(np.asarray(a, dtype=float), -a_max, a_max)


def feedback(x, x_ref, a_ff, K: GainMatrix, a_max: float = A_MAX) -> ControlInput:
    """``u = -K (x - x_ref) + [a_ff; 0]`` with per-axis saturation."""
    e = np.asarray(x, dtype=float) - np.asarray(x_ref, dtype=float)
    e[6] = wrap_angle(e[6])
    u = -K.K @ e
    u[0:3] += np.asarray(a_ff, dtype=float)
    return ControlInput(a=saturate(u[0:3], a_max), yaw_rate=float(u[3]))


def compensate(u: ControlInput, f_pred, a_max: float = A_MAX) -> ControlInput:
    """Cancel a predicted disturbance acceleration."""
    return ControlInput(a=saturate(u.a - np.asarray(f_pred, dtype=float), a_max),
                        yaw_rate=u.yaw_rate)


# -- disturbance observer -------------------------------------------------

@dataclass(frozen=True)
class ObserverGains:
    """Steady-state Kalman gain of one ``[p, v, f]`` axis, shared by all three."""
    L: np.ndarray
    F: np.ndarray
    Gu: np.ndarray
    dt: float


@dataclass(frozen=True)
class ObserverState:
    x_hat: np.ndarray
    f_hat: np.ndarray = field(default_factory=lambda: np.zeros(3))
    fixed_gain: bool = True


# Process/measurement noise intensities of the steady-state filter. The
# disturbance intensity sets how fast f_hat follows a step (about 1 s to 95%).
OBS_Q_P = 1e-6
OBS_Q_V = 1e-4
OBS_Q_F = 4e-3
OBS_R_P = 1e-4
OBS_R_V = 1e-2


def observer_gains(dt: float, q_f: float = OBS_Q_F, q_p: float = OBS_Q_P,
                   q_v: float = OBS_Q_V, r_p: float = OBS_R_P,
                   r_v: float = OBS_R_V) -> ObserverGains:
    F = np.array([[1.0, dt, 0.5 * dt * dt], [0.0, 1.0, dt], [0.0, 0.0, 1.0]])
    Gu = np.array([0.5 * dt * dt, dt, 0.0])
    H = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    Qn = np.diag([q_p, q_v, q_f]) * dt
    Rn = np.diag([r_p, r_v])
    P = scipy.linalg.solve_discrete_are(F.T, H.T, Qn, Rn)
    L = P @ H.T @ np.linalg.inv(H @ P @ H.T + Rn)
    return ObserverGains(L=L, F=F, Gu=Gu, dt=dt)


def observer_init(x) -> ObserverState:
    return ObserverState(x_hat=np.array(x, dtype=float))


def observer_update(obs: ObserverState, x_meas, u_applied: ControlInput, dt: float,
                    gains: ObserverGains | None = None) -> ObserverState:
    """One predict/correct cycle of the augmented ``[x; f_ext]`` filter."""
    if not dt > 0.0:
        raise InvalidParameterError("dt must be positive")
    if gains is None or abs(gains.dt - dt) > 1e-12:
        gains = observer_gains(dt)
    x_meas = np.asarray(x_meas, dtype=float)
    x_hat = np.empty(7)
    f_hat = np.empty(3)
    for i in range(3):
        s = np.array([obs.x_hat[i], obs.x_hat[3 + i], obs.f_hat[i]])
        s = gains.F @ s + gains.Gu * u_applied.a[i]
        z = np.array([x_meas[i], x_meas[3 + i]])
        s = s + gains.L @ (z - s[0:2])
        x_hat[i], x_hat[3 + i], f_hat[i] = s
    x_hat[6] = x_meas[6]
    return ObserverState(x_hat=x_hat, f_hat=f_hat, fixed_gain=True)
