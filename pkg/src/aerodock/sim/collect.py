"""Scripted data-collection flights for the learning curriculum."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dynamics import VehicleState
from ..learning.labels import estimate_bias, make_label
from ..learning.network import MlpModel
from ..learning.training import Dataset
from ..planner import BoundaryState, HoldMode, Reference, plan, sample
from .config import ScenarioConfig
from .engine import _COL, Simulation, run_rng

T_CAL = 5.0        # calibration hover, far from the wake
T_TRANSIT = 3.0    # move from calibration point to the sweep pattern
CAL_OFFSET = 3.0   # lateral distance of the calibration point, m
SWEEP_RADIUS = 1.0
MOVE_TIME = 1.6    # quintic move between sweep waypoints
DWELL_TIME = 1.4   # hover at each waypoint
AXIS_FRACTION = 0.4  # share of waypoints placed directly under the leader
LEADER_SEGMENT = 6.0              # leader alternates hover / cruise segments
LEADER_RAMP = 1.0                 # velocity ramp between segments
LEADER_SPEEDS = (0.1, 0.3)        # cruise speed range, m/s


class LeaderSchedule:
    """Leader reference: alternating hover and constant-velocity cruise
    segments joined by linear velocity ramps (closed form)."""

    def __init__(self, p0, rng: np.random.Generator, duration: float):
        self.p0 = np.asarray(p0, dtype=float)
        n = int(math.ceil(duration / LEADER_SEGMENT)) + 1
        vel = []
        for k in range(n):
            if k % 2 == 0:
                vel.append(np.zeros(3))
            else:
                sp = rng.uniform(*LEADER_SPEEDS)
                hd = rng.uniform(-math.pi, math.pi)
                vel.append(sp * np.array([math.cos(hd), math.sin(hd), 0.0]))
        self.vel = vel
        self.p_start = [self.p0.copy()]
        for k in range(1, n):
            self.p_start.append(self._p_in(k - 1, LEADER_SEGMENT))

    def _p_in(self, k: int, tau: float) -> np.ndarray:
        v_prev = self.vel[k - 1] if k > 0 else np.zeros(3)
        dv = self.vel[k] - v_prev
        p0 = self.p_start[k]
        if tau < LEADER_RAMP:
            return p0 + v_prev * tau + dv * tau * tau / (2.0 * LEADER_RAMP)
        return p0 + v_prev * tau + dv * (tau - 0.5 * LEADER_RAMP)

    def __call__(self, t: float) -> Reference:
        k = min(int(t // LEADER_SEGMENT), len(self.vel) - 1)
        tau = t - k * LEADER_SEGMENT
        v_prev = self.vel[k - 1] if k > 0 else np.zeros(3)
        dv = self.vel[k] - v_prev
        if tau < LEADER_RAMP:
            v, a = v_prev + dv * tau / LEADER_RAMP, dv / LEADER_RAMP
        else:
            v, a = self.vel[k].copy(), np.zeros(3)
        return Reference(self._p_in(k, tau), v, a, 0.0)


def _waypoints(rng, band, n):
    """Waypoints below the leader, skewed towards the axis and towards the
    closer edge of the band (where the wake is strongest and where the
    next stage, or a dock, will operate)."""
    lo, hi = min(band), max(band)
    r = SWEEP_RADIUS * rng.uniform(0.0, 1.0, n) ** 2
    r = np.where(rng.uniform(size=n) < AXIS_FRACTION, 0.05 * rng.uniform(size=n), r)
    th = rng.uniform(-math.pi, math.pi, n)
    z = lo + (hi - lo) * rng.uniform(0.0, 1.0, n) ** 2
    return np.stack((r * np.cos(th), r * np.sin(th), z), axis=1)


def sweep_reference(leader_ref, band: tuple[float, float], rng: np.random.Generator,
                    duration: float):
    """Follower reference: calibration hover far from the wake, then random
    waypoints below the leader joined by quintic moves with short hovers.

    Waypoints are relative to the (moving) leader reference.
    """
    lo, hi = min(band), max(band)
    mid = 0.5 * (lo + hi)
    cal = np.array([0.0, CAL_OFFSET, mid])
    t0 = T_CAL + T_TRANSIT
    seg = MOVE_TIME + DWELL_TIME
    n = int(math.ceil(max(0.0, duration - t0) / seg)) + 2
    wps = _waypoints(rng, band, n)
    first = plan(BoundaryState.rest(cal), BoundaryState.rest(wps[0]), T_TRANSIT, HoldMode.HOLD_POINT, T_CAL)
    moves = [plan(BoundaryState.rest(a), BoundaryState.rest(b), MOVE_TIME, HoldMode.HOLD_POINT, 0.0)
             for a, b in zip(wps[:-1], wps[1:])]

    def rel(t):
        if t < T_CAL:
            return cal, np.zeros(3), np.zeros(3)
        if t < t0:
            r = sample(first, t)
            return r.p, r.v, r.a
        k, s = divmod(t - t0, seg)
        k = min(int(k), len(moves) - 1)
        if s < DWELL_TIME:
            return wps[k], np.zeros(3), np.zeros(3)
        r = sample(moves[k], s - DWELL_TIME)
        return r.p, r.v, r.a

    def ref(t: float) -> Reference:
        L = leader_ref(t)
        p, v, a = rel(t)
        return Reference(L.p + p, L.v + v, L.a + a, 0.0)
    return ref, cal


@dataclass
class SimEnv:
    """Collects labelled residuals by flying scripted sweeps in the simulator.

    The follower deploys the previous stage's model plus a residual
    disturbance observer, so it holds the commanded band even where the
    model is still wrong.
    """
    cfg: ScenarioConfig = ScenarioConfig(leader_mode="hover", mission="formation", compensation="none")
    stage_duration: float = 60.0

    def collect_stage(self, stage: int, band, model: MlpModel | None = None,
                      duration: float | None = None, seed: int | None = None) -> Dataset:
        duration = self.stage_duration if duration is None else duration
        cfg = self.cfg.replace(mission="formation", duration=duration,
                               compensation="model_observer",
                               seed=self.cfg.seed if seed is None else seed, run_index=stage)
        rng = run_rng(cfg.seed, stage, stream=2)
        lead = LeaderSchedule(cfg.leader_start, rng, duration)
        bref, cal = sweep_reference(lead, band, rng, duration)
        p_a0 = lead(0.0)
        alpha0 = VehicleState(p_a0.p.copy(), p_a0.v.copy(), np.eye(3), cfg.mass_alpha)
        bravo0 = VehicleState(p_a0.p + cal, p_a0.v.copy(), np.eye(3), cfg.mass_bravo)
        sim = Simulation(cfg, model, bravo_ref=bref, alpha_ref=lead, alpha_init=alpha0,
                         bravo_init=bravo0)
        log, _ = sim.run()
        return labels_from_log(log.array(), cfg, stage)


def labels_from_log(arr: np.ndarray, cfg: ScenarioConfig, stage: int) -> Dataset:
    """Residual labels from consecutive control ticks, bias from the calibration hover."""
    dt_c = cfg.dt_control
    vb = arr[:, _COL["bravo_vn"]:_COL["bravo_vd"] + 1]
    a_obs = (vb[1:] - vb[:-1]) / dt_c + np.asarray(cfg.accel_bias)
    u = arr[:-1, _COL["u_n"]:_COL["u_d"] + 1]
    t = arr[:-1, 0]
    resid = make_label(a_obs, u)
    cal = t < T_CAL
    bias = estimate_bias(resid[cal]) if cal.any() else np.zeros(3)
    Y = resid - bias
    pa = arr[:-1, _COL["alpha_n"]:_COL["alpha_d"] + 1]
    va = arr[:-1, _COL["alpha_vn"]:_COL["alpha_vd"] + 1]
    pb = arr[:-1, _COL["bravo_n"]:_COL["bravo_d"] + 1]
    X9 = np.hstack((pb - pa, va, vb[:-1]))
    return Dataset(X9, Y, np.full(len(Y), stage), t)
