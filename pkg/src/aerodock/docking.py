"""Suspended docking bar, latency-aware gripper and the dock state machine."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .dynamics import G, InvalidParameterError

EPS_CONTACT = 0.02
LATENCY = 0.015
TAU_SERVO = 0.06
TAU_RAMP = 1.0
APERTURE = 0.1
DAMPING_RATIO = 0.05
BAR_LENGTH = 0.2


@dataclass(frozen=True)
class PlatformState:
    """Bar hanging from an anchor on the leader as a damped spherical pendulum.

    ``q`` is the anchor-to-bar vector (length ``d_p``), ``w`` its rate.
    The bar axis is horizontal along the leader's east body axis.
    """
    d_p: float
    q: np.ndarray
    w: np.ndarray
    attach: np.ndarray = field(default_factory=lambda: np.zeros(3))
    damping_ratio: float = DAMPING_RATIO
    bar_length: float = BAR_LENGTH

    @property
    def damping(self) -> float:
        return 2.0 * self.damping_ratio * math.sqrt(G / self.d_p)

    def anchor(self, leader) -> np.ndarray:
        return leader.p + leader.R @ self.attach

    def bar_position(self, leader) -> np.ndarray:
        return self.anchor(leader) + self.q

    def bar_velocity(self, leader) -> np.ndarray:
        return leader.v + self.w

    def bar_axis(self, leader) -> np.ndarray:
        return leader.R[:, 1]

    def closest_point(self, leader, point) -> np.ndarray:
        """Point of the bar segment nearest to ``point``."""
        c = self.bar_position(leader)
        u = self.bar_axis(leader)
        s = float(np.dot(np.asarray(point) - c, u))
        s = max(-0.5 * self.bar_length, min(0.5 * self.bar_length, s))
        return c + s * u


def platform_at_rest(d_p: float, attach=None, damping_ratio: float = DAMPING_RATIO,
                     bar_length: float = BAR_LENGTH) -> PlatformState:
    if not d_p > 0.0:
        raise InvalidParameterError("cable length must be positive")
    attach = np.zeros(3) if attach is None else np.asarray(attach, dtype=float)
    return PlatformState(d_p=d_p, q=np.array([0.0, 0.0, d_p]), w=np.zeros(3),
                         attach=attach, damping_ratio=damping_ratio, bar_length=bar_length)


def platform_step(leader, plat: PlatformState, dt: float, leader_acc=None) -> PlatformState:
    """Advance the swing; ``leader_acc`` drives the pendulum from the anchor."""
    if not dt > 0.0:
        raise InvalidParameterError("dt must be positive")
    acc = np.zeros(3) if leader_acc is None else np.asarray(leader_acc, dtype=float)
    q, w = kernels.pendulum_step(plat.q, plat.w, acc, plat.d_p, plat.damping, G, dt)
    return replace(plat, q=q, w=w)


# -- gripper ----------------------------------------------------------------

class Gate(enum.Enum):
    OPEN = "open"
    CLOSING = "closing"
    CLOSED = "closed"


@dataclass(frozen=True)
class GripperEvent:
    t: float
    type: str  # contact | close | docked | missed
    rel_pos: tuple
    rel_vel: tuple

    def to_dict(self) -> dict:
        return {"t": self.t, "type": self.type, "rel_pos": list(self.rel_pos),
                "rel_vel": list(self.rel_vel)}


@dataclass(frozen=True)
class GripperState:
    gate: Gate = Gate.OPEN
    closing_elapsed: float = 0.0
    close_start: float | None = None
    queue: tuple = ()  # times at which a recognised trigger closes the gate
    aperture: float = APERTURE
    tip_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    eps_contact: float = EPS_CONTACT
    latency: float = LATENCY
    tau_servo: float = TAU_SERVO
    contacted: bool = False


def _ev(t, kind, rel_pos, rel_vel):
    return GripperEvent(float(t), kind, tuple(float(x) for x in rel_pos),
                        tuple(float(x) for x in rel_vel))


def gripper_step(grip: GripperState, bar_rel_pos, bar_rel_vel, t: float, dt: float,
                 command_close: bool = False):
    """Advance the gate to time ``t``.

    ``bar_rel_pos``/``bar_rel_vel`` are the bar relative to the gripper tip
    at ``t``. A touch closer than ``eps_contact`` is recognised ``latency``
    later; a software command is queued without sensing latency. The gate
    then takes ``tau_servo`` to close, and the bar is retained only if it is
    still within the aperture. Event timestamps are the exact scheduled
    times, not the step grid.
    """
    if not dt > 0.0:
        raise InvalidParameterError("dt must be positive")
    rel_pos = np.asarray(bar_rel_pos, dtype=float)
    rel_vel = np.asarray(bar_rel_vel, dtype=float)
    event = None
    g = grip
    if g.gate is Gate.OPEN and not g.queue:
        if not g.contacted and float(np.linalg.norm(rel_pos)) < g.eps_contact:
            g = replace(g, queue=(t + g.latency,), contacted=True)
            event = _ev(t, "contact", rel_pos, rel_vel)
        elif command_close:
            g = replace(g, queue=(t,))
    if g.gate is Gate.OPEN and g.queue and t >= g.queue[0]:
        start = g.queue[0]
        g = replace(g, gate=Gate.CLOSING, close_start=start, queue=g.queue[1:])
    if g.gate is Gate.CLOSING:
        elapsed = min(t - g.close_start, g.tau_servo)
        g = replace(g, closing_elapsed=elapsed)
        if t - g.close_start >= g.tau_servo:
            kind = "docked" if float(np.linalg.norm(rel_pos)) < g.aperture else "missed"
            g = replace(g, gate=Gate.CLOSED, closing_elapsed=g.tau_servo)
            event = _ev(g.close_start + g.tau_servo, kind, rel_pos, rel_vel)
    return g, event


# -- mission state ----------------------------------------------------------

class DockPhase(enum.Enum):
    APPROACH = "Approach"
    CONTACT_PENDING = "ContactPending"
    DOCKED = "Docked"
    MISSED = "Missed"


_ALLOWED = {
    DockPhase.APPROACH: {DockPhase.CONTACT_PENDING},
    DockPhase.CONTACT_PENDING: {DockPhase.DOCKED, DockPhase.MISSED},
    DockPhase.DOCKED: set(),
    DockPhase.MISSED: set(),
}


@dataclass(frozen=True)
class DockState:
    phase: DockPhase = DockPhase.APPROACH
    transitions: tuple = ()  # (t, phase) pairs

    @property
    def resolved(self) -> bool:
        return self.phase in (DockPhase.DOCKED, DockPhase.MISSED)

    def time_of(self, phase: DockPhase):
        for t, ph in self.transitions:
            if ph is phase:
                return t
        return None

    def advance(self, phase: DockPhase, t: float) -> "DockState":
        if phase is self.phase:
            return self
        if phase not in _ALLOWED[self.phase]:
            raise ValueError(f"illegal dock transition {self.phase.value} -> {phase.value}")
        return DockState(phase, self.transitions + ((float(t), phase),))


def on_gripper_event(dock: DockState, event: GripperEvent | None) -> DockState:
    if event is None:
        return dock
    if event.type == "contact":
        return dock.advance(DockPhase.CONTACT_PENDING, event.t)
    if event.type in ("docked", "missed"):
        if dock.phase is DockPhase.APPROACH:
            dock = dock.advance(DockPhase.CONTACT_PENDING, event.t)
        return dock.advance(DockPhase.DOCKED if event.type == "docked" else DockPhase.MISSED, event.t)
    return dock


# -- post-dock thrust transfer ---------------------------------------------

@dataclass(frozen=True)
class Coupling:
    thrust_fraction: float
    follower_thrust: float
    leader_load: np.ndarray  # force on the leader, N (NED)


def couple_on_dock(alpha, bravo, plat: PlatformState | None = None, t_since_dock: float = 0.0,
                   tau_ramp: float = TAU_RAMP, g: float = G) -> Coupling:
    """Thrust hand-over after a dock.

    Bravo's collective ramps linearly from hover to zero over ``tau_ramp``
    and Alpha receives the unsupported part of Bravo's weight.
    """
    if t_since_dock < 0.0:
        raise InvalidParameterError("coupling queried before the dock")
    frac = max(0.0, 1.0 - t_since_dock / tau_ramp) if tau_ramp > 0.0 else 0.0
    weight = bravo.mass * g
    return Coupling(thrust_fraction=frac, follower_thrust=frac * weight,
                    leader_load=np.array([0.0, 0.0, weight * (1.0 - frac)]))
