"""Translational multirotor dynamics with a first-order attitude loop.

Frames are NED (down positive). A vehicle obeys ``m a = -R T e3 + m g e3``
plus an external acceleration; the attitude ``R`` (body to inertial) relaxes
towards the commanded one with time constant ``tau_att``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels

logger = logging.getLogger(__name__)

G = 9.81
EPS_THRUST = 0.1 * G
TAU_ATT = 0.05
MAX_DT = 0.01
E3 = np.array([0.0, 0.0, 1.0])


class InvalidParameterError(ValueError):
    """A parameter is outside its documented domain."""


class SimulationFault(RuntimeError):
    """Non-finite values reached the integrator."""


def rot_z(yaw: float) -> np.ndarray:
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def yaw_of(R: np.ndarray) -> float:
    return math.atan2(R[1, 0], R[0, 0])


def euler_zyx(R: np.ndarray) -> tuple[float, float, float]:
    """(roll, pitch, yaw) of a body-to-inertial rotation, aerospace ZYX order."""
    pitch = -math.asin(max(-1.0, min(1.0, R[2, 0])))
    roll = math.atan2(R[2, 1], R[2, 2])
    return roll, pitch, yaw_of(R)


@dataclass(frozen=True)
class VehicleState:
    p: np.ndarray
    v: np.ndarray
    R: np.ndarray = field(default_factory=lambda: np.eye(3))
    mass: float = 0.7

    @property
    def yaw(self) -> float:
        return yaw_of(self.R)

    @property
    def x(self) -> np.ndarray:
        """The 7-vector ``[p, v, yaw]`` of the linear model."""
        return np.concatenate((self.p, self.v, [self.yaw]))

    @classmethod
    def at_rest(cls, p, yaw: float = 0.0, mass: float = 0.7) -> "VehicleState":
        return cls(np.asarray(p, dtype=float).copy(), np.zeros(3), rot_z(yaw), mass)

    def with_(self, **changes) -> "VehicleState":
        return replace(self, **changes)


@dataclass(frozen=True)
class InnerLoopCommand:
    R_des: np.ndarray
    thrust: float
    saturated: bool = False


@dataclass(frozen=True)
class LinearModel:
    A: np.ndarray
    B: np.ndarray
    B_bar: np.ndarray
    C: np.ndarray


def linear_model(mass: float) -> LinearModel:
    """Feedforward-linearized model ``x' = A x + B u + B_bar f_ext``.

    The mass does not appear in the matrices (the input is an
    acceleration) but must still be physical.
    """
    if not mass > 0.0:
        raise InvalidParameterError(f"mass must be positive, got {mass!r}")
    A = np.zeros((7, 7))
    A[0:3, 3:6] = np.eye(3)
    B_bar = np.vstack((np.zeros((3, 3)), np.eye(3)))
    B = np.zeros((7, 4))
    B[0:6, 0:3] = B_bar
    B[6, 3] = 1.0
    return LinearModel(A=A, B=B, B_bar=B_bar, C=np.eye(7))


def invert_dynamics(a_cmd, yaw_cmd: float, mass: float, g: float = G,
                    eps: float = EPS_THRUST) -> InnerLoopCommand:
    """Map an acceleration command and yaw to a desired attitude and thrust.

    Commands whose thrust vector ``g e3 - a_cmd`` is shorter than ``eps``
    (near free fall) are saturated to length ``eps`` and flagged.
    """
    a_cmd = np.asarray(a_cmd, dtype=float)
    if not np.all(np.isfinite(a_cmd)) or not math.isfinite(yaw_cmd):
        raise SimulationFault(f"non-finite command {a_cmd}, yaw {yaw_cmd}")
    R_des, thrust, saturated = kernels.thrust_attitude(a_cmd, yaw_cmd, mass, g, eps)
    if saturated:
        logger.warning("thrust vector below %.3f m/s^2 for a_cmd=%s; saturated", eps, a_cmd)
    return InnerLoopCommand(R_des=R_des, thrust=thrust, saturated=saturated)


def step(state: VehicleState, cmd: InnerLoopCommand, f_ext, dt: float,
         tau_att: float = TAU_ATT, g: float = G) -> VehicleState:
    """Integrate one physics step.

    ``f_ext`` is an acceleration (m/s^2) added to the rigid-body equation.
    """
    if not 0.0 < dt <= MAX_DT:
        raise InvalidParameterError(f"dt must be in (0, {MAX_DT}], got {dt!r}")
    f_ext = np.asarray(f_ext, dtype=float)
    if not (np.all(np.isfinite(f_ext)) and np.all(np.isfinite(state.p))
            and np.all(np.isfinite(state.v)) and math.isfinite(cmd.thrust)):
        raise SimulationFault("non-finite input to dynamics step")
    p, v, R = kernels.vehicle_step(state.p, state.v, state.R, cmd.R_des, cmd.thrust,
                                   state.mass, f_ext, dt, tau_att, g)
    return VehicleState(p, v, R, state.mass)


def acceleration(state: VehicleState, cmd: InnerLoopCommand, f_ext, g: float = G) -> np.ndarray:
    """Instantaneous acceleration for the current attitude (no integration)."""
    return -state.R[:, 2] * (cmd.thrust / state.mass) + g * E3 + np.asarray(f_ext, dtype=float)
