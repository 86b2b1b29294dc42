"""Fixed-step two-vehicle simulation.

Physics runs at ``cfg.physics_hz``; control, prediction and logging run at
``cfg.control_hz`` with commands held between ticks. Alpha (the leader)
hovers, cruises or is rigidly mounted; Bravo (the follower) flies a
reference supplied by a mission.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import dynamics as dyn
from ..dynamics import linear_model
from ..control import (ControlInput, compensate, feedback, observer_gains,
                       observer_init, observer_update, saturate, solve_lqr)
from ..docking import (DockPhase, DockState, Gate, GripperState, couple_on_dock, gripper_step,
                       on_gripper_event, platform_at_rest, platform_step)
from ..downwash import TurbulenceState, mean_force_at, sample_force
from ..learning.features import RelativeState9
from ..learning.network import MlpModel, predict
from ..planner import BoundaryState, HoldMode, Reference, plan, predict_platform, sample
from .config import ScenarioConfig

LOG_COLUMNS = (
    "t",
    "alpha_n", "alpha_e", "alpha_d", "alpha_vn", "alpha_ve", "alpha_vd",
    "bravo_n", "bravo_e", "bravo_d", "bravo_vn", "bravo_ve", "bravo_vd",
    "bar_n", "bar_e", "bar_d",
    "ref_n", "ref_e", "ref_d", "ref_vn", "ref_ve", "ref_vd",
    "u_n", "u_e", "u_d",
    "f_true_n", "f_true_e", "f_true_d",
    "f_pred_n", "f_pred_e", "f_pred_d",
    "f_hat_n", "f_hat_e", "f_hat_d",
    "err_down", "err_3d", "in_proximity", "dock_phase", "gate",
)
_COL = {name: i for i, name in enumerate(LOG_COLUMNS)}
PHASE_CODE = {DockPhase.APPROACH: 0, DockPhase.CONTACT_PENDING: 1, DockPhase.DOCKED: 2,
              DockPhase.MISSED: 3}
GATE_CODE = {Gate.OPEN: 0, Gate.CLOSING: 1, Gate.CLOSED: 2}
METRIC_WINDOW = 0.5
# Alpha's trim observer is faster than Bravo's baseline one (payload pickup).
ALPHA_OBS_Q_F = 0.6

RefFn = Callable[[float], Reference]


@dataclass
class SimLog:
    rows: list = field(default_factory=list)
    events: list = field(default_factory=list)
    columns: tuple = LOG_COLUMNS

    def array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float).reshape(-1, len(self.columns))

    def column(self, name: str) -> np.ndarray:
        return self.array()[:, _COL[name]]


@dataclass(frozen=True)
class RunSummary:
    result: str                 # "Dock" or "Miss"
    err_down: float             # mean |down error| over the metric window, m
    err_3d: float               # mean 3D error over the metric window, m
    f_pred: float | None        # mean |f_pred| over the window, m/s^2 (None without model)
    dock_time: float | None
    window_end: float
    seed: int = 0
    run_index: int = 0
    events: tuple = ()

    def to_dict(self) -> dict:
        return {"result": self.result, "err_down": self.err_down, "err_3d": self.err_3d,
                "f_pred": self.f_pred, "dock_time": self.dock_time,
                "window_end": self.window_end, "window": METRIC_WINDOW,
                "seed": self.seed, "run_index": self.run_index,
                "events": [e.to_dict() for e in self.events]}

    @classmethod
    def from_dict(cls, d: dict) -> "RunSummary":
        from ..docking import GripperEvent
        ev = tuple(GripperEvent(e["t"], e["type"], tuple(e["rel_pos"]), tuple(e["rel_vel"]))
                   for e in d.get("events", []))
        return cls(d["result"], d["err_down"], d["err_3d"], d["f_pred"], d["dock_time"],
                   d["window_end"], d.get("seed", 0), d.get("run_index", 0), ev)


def run_rng(seed: int, run_index: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, run_index)``; ``stream`` separates uses."""
    return np.random.Generator(np.random.Philox(key=[int(seed) + (int(stream) << 32), int(run_index)]))


def leader_reference(cfg: ScenarioConfig) -> RefFn | None:
    p0 = np.array(cfg.leader_start)
    if cfg.leader_mode == "rigid":
        return None
    if cfg.leader_mode == "hover":
        return lambda t: Reference(p0.copy(), np.zeros(3), np.zeros(3), cfg.leader_yaw)
    v = cfg.leader_speed * np.array([math.cos(cfg.leader_heading), math.sin(cfg.leader_heading), 0.0])
    return lambda t: Reference(p0 + v * t, v.copy(), np.zeros(3), cfg.leader_yaw)


class Simulation:
    """One scenario run. Call :meth:`run` once."""

    def __init__(self, cfg: ScenarioConfig, model: MlpModel | None = None,
                 bravo_ref: RefFn | None = None, alpha_ref: RefFn | None | str = "auto",
                 alpha_init: dyn.VehicleState | None = None,
                 bravo_init: dyn.VehicleState | None = None):
        if cfg.compensation == "model" and model is None:
            raise dyn.InvalidParameterError("compensation 'model' needs a trained model")
        self.cfg = cfg
        self.model = model
        self.field = cfg.field_params()
        self.K = solve_lqr(cfg.lqr, linear_model(cfg.mass_bravo))
        self.obs_gains = observer_gains(cfg.dt_control)
        self.obs_gains_a = observer_gains(cfg.dt_control, q_f=ALPHA_OBS_Q_F)
        self.alpha_ref = leader_reference(cfg) if alpha_ref == "auto" else alpha_ref

        ref0 = self.alpha_ref(0.0) if self.alpha_ref is not None else None
        if alpha_init is None:
            p0 = np.array(cfg.leader_start)
            v0 = ref0.v.copy() if ref0 is not None else np.zeros(3)
            alpha_init = dyn.VehicleState(p0, v0, dyn.rot_z(cfg.leader_yaw), cfg.mass_alpha)
        self.alpha = alpha_init
        if bravo_init is None:
            bravo_init = dyn.VehicleState(self.alpha.p + np.array(cfg.start_offset),
                                          np.array(cfg.start_velocity), np.eye(3), cfg.mass_bravo)
        self.bravo = bravo_init
        self.tip = np.array(cfg.tip_offset)
        self.plat = platform_at_rest(cfg.d_p, np.array(cfg.attach), cfg.bar_damping_ratio,
                                     cfg.bar_length)
        self.grip = GripperState(aperture=cfg.aperture, tip_offset=self.tip,
                                 eps_contact=cfg.eps_contact, latency=cfg.latency,
                                 tau_servo=cfg.tau_servo)
        self.dock = DockState()
        self.turb = TurbulenceState(run_rng(cfg.seed, cfg.run_index))
        self.obs_b = observer_init(self.bravo.x)
        self.obs_a = observer_init(self.alpha.x)
        self.u_b_prev = ControlInput(np.zeros(3))
        self.u_a_prev = ControlInput(np.zeros(3))
        self.f_pred_prev = np.zeros(3)

        self.gripper_enabled = cfg.mission == "dock"
        self.traj = None
        if bravo_ref is None:
            self.traj = self._approach_plan()
            bravo_ref = lambda t: sample(self.traj, t)  # noqa: E731
        self.bravo_ref = bravo_ref
        self.t_dock: float | None = None
        self.t_abort: float | None = None
        self.dock_offset = np.zeros(3)
        self.log = SimLog()

    # -- mission -------------------------------------------------------

    def _approach_plan(self):
        cfg = self.cfg
        goal = predict_platform(self.alpha.p, self.alpha.v, 0.0, cfg.t_h, cfg.d_p,
                                gripper_offset=self.bravo.R @ self.tip,
                                attach_offset=self.alpha.R @ np.array(cfg.attach))
        if cfg.mission == "dock" and cfg.engage_depth:
            goal = BoundaryState(goal.p - np.array([0.0, 0.0, cfg.engage_depth]), goal.v, goal.a)
        mode = HoldMode.TRACK_LEADER if cfg.leader_mode == "constant_velocity" else HoldMode.HOLD_POINT
        start = BoundaryState(self.bravo.p.copy(), self.bravo.v.copy(), np.zeros(3))
        return plan(start, goal, cfg.t_h, mode, 0.0, 0.0)

    def _abort(self, t: float) -> None:
        """Give up the approach: stop sensing contact and descend."""
        self.t_abort = t
        self.gripper_enabled = False
        start = BoundaryState(self.bravo.p.copy(), self.bravo.v.copy(), np.zeros(3))
        goal = BoundaryState.rest(self.bravo.p + np.array([0.0, 0.0, self.cfg.descent]))
        self.traj = plan(start, goal, self.cfg.descent_time, HoldMode.HOLD_POINT, t, 0.0)
        self.bravo_ref = lambda tt: sample(self.traj, tt)

    # -- control -------------------------------------------------------

    def _predict(self) -> np.ndarray:
        x9 = RelativeState9.between(self.alpha, self.bravo)
        return predict(self.model, x9, dyn.rot_z(self.alpha.yaw))

    def _true_mean(self) -> np.ndarray:
        if not self.cfg.field_enabled or self.t_dock is not None:
            return np.zeros(3)
        return mean_force_at(self.bravo.p - self.alpha.p, self.field)

    def run(self) -> tuple[SimLog, RunSummary]:
        cfg = self.cfg
        n_ticks = int(round(cfg.duration * cfg.control_hz))
        n_sub = cfg.substeps
        dt = cfg.dt
        dt_c = cfg.dt_control
        for k in range(n_ticks + 1):
            t = k * dt_c
            if (cfg.mission == "dock" and self.t_abort is None and not self.dock.resolved
                    and self.dock.phase is DockPhase.APPROACH and t >= cfg.t_h + cfg.abort_margin - 1e-9):
                self._abort(t)

            # Bravo
            ref = self.bravo_ref(t)
            # in model_observer mode the prediction is a known input, so f_hat is the residual
            u_obs = self.u_b_prev
            if cfg.compensation == "model_observer":
                u_obs = ControlInput(u_obs.a + self.f_pred_prev, u_obs.yaw_rate)
            self.obs_b = observer_update(self.obs_b, self.bravo.x, u_obs, dt_c, self.obs_gains)
            f_pred = np.zeros(3)
            f_comp = np.zeros(3)
            if cfg.compensation == "model":
                f_pred = f_comp = self._predict()
            elif cfg.compensation == "observer":
                f_pred = f_comp = self.obs_b.f_hat.copy()
            elif cfg.compensation == "model_observer":
                f_pred = self._predict() if self.model is not None else np.zeros(3)
                f_comp = f_pred + self.obs_b.f_hat
            self.f_pred_prev = f_pred
            u_fb = feedback(self.bravo.x, ref.x, ref.a, self.K, cfg.a_max)
            u_b = u_fb if cfg.compensation in ("none", "oracle") else compensate(u_fb, f_comp, cfg.a_max)
            cmd_b = dyn.invert_dynamics(u_b.a, ref.yaw, cfg.mass_bravo)

            # Alpha: LQR plus observer trim (trim bypasses the acceleration limit)
            cmd_a = None
            if self.alpha_ref is not None:
                ref_a = self.alpha_ref(t)
                self.obs_a = observer_update(self.obs_a, self.alpha.x, self.u_a_prev, dt_c,
                                            self.obs_gains_a)
                ua = feedback(self.alpha.x, ref_a.x, ref_a.a, self.K, cfg.a_max)
                u_a = ControlInput(ua.a - self.obs_a.f_hat, ua.yaw_rate)
                cmd_a = dyn.invert_dynamics(u_a.a, ref_a.yaw, cfg.mass_alpha)
                self.u_a_prev = u_a

            alpha0, bravo0, plat0 = self.alpha, self.bravo, self.plat
            if k == n_ticks:
                f_mean_tick = self._true_mean()
                self._log(t, alpha0, bravo0, plat0, ref, u_b, f_mean_tick, f_pred)
                break

            f_acc = np.zeros(3)
            u_applied = np.zeros(3)
            for j in range(n_sub):
                tj = t + j * dt
                f_true, self.turb = sample_force(self._true_mean(), self.turb, self.field, dt)
                if self.t_dock is not None:
                    f_true = np.zeros(3)
                f_acc += f_true
                cmd = cmd_b
                if cfg.compensation == "oracle":
                    ub = saturate(u_fb.a - f_true, cfg.a_max)
                    cmd = dyn.invert_dynamics(ub, ref.yaw, cfg.mass_bravo)
                    u_applied += ub
                else:
                    u_applied += u_b.a
                self._physics(cmd, cmd_a, f_true, dt, tj + dt)
            f_mean_tick = f_acc / n_sub
            u_log = ControlInput(u_applied / n_sub, u_b.yaw_rate)
            self.u_b_prev = u_log
            self._log(t, alpha0, bravo0, plat0, ref, u_log, f_mean_tick, f_pred)
        return self.log, self.summary()

    # -- physics -------------------------------------------------------

    def _physics(self, cmd_b, cmd_a, f_true, dt: float, t_next: float) -> None:
        cfg = self.cfg
        alpha_prev_v = self.alpha.v
        if cmd_a is not None:
            load = np.zeros(3)
            if self.t_dock is not None:
                load = couple_on_dock(self.alpha, self.bravo, self.plat, max(0.0, t_next - self.t_dock),
                                      cfg.tau_ramp).leader_load / cfg.mass_alpha
            self.alpha = dyn.step(self.alpha, cmd_a, load, dt, cfg.tau_att)
        leader_acc = (self.alpha.v - alpha_prev_v) / dt
        self.plat = platform_step(self.alpha, self.plat, dt, leader_acc)

        if self.t_dock is not None:
            p = self.plat.bar_position(self.alpha) + self.dock_offset
            self.bravo = dyn.VehicleState(p, self.plat.bar_velocity(self.alpha).copy(),
                                          self.bravo.R, self.bravo.mass)
            return
        self.bravo = dyn.step(self.bravo, cmd_b, f_true, dt, cfg.tau_att)

        if not (self.gripper_enabled or self.dock.phase is DockPhase.CONTACT_PENDING):
            return
        tip = self.bravo.p + self.bravo.R @ self.tip
        rel = self.plat.closest_point(self.alpha, tip) - tip
        rel_v = self.plat.bar_velocity(self.alpha) - self.bravo.v
        self.grip, ev = gripper_step(self.grip, rel, rel_v, t_next, dt)
        if ev is None:
            return
        self.log.events.append(ev)
        self.dock = on_gripper_event(self.dock, ev)
        if self.dock.phase is DockPhase.DOCKED:
            self.t_dock = ev.t
            self.gripper_enabled = False
            self.dock_offset = self.bravo.p - self.plat.bar_position(self.alpha)
        elif self.dock.phase is DockPhase.MISSED and self.t_abort is None:
            self._abort(t_next)

    # -- logging / metrics ----------------------------------------------

    def _log(self, t, alpha, bravo, plat, ref, u, f_true, f_pred) -> None:
        err = bravo.p - ref.p
        dp = bravo.p - alpha.p
        row = [t, *alpha.p, *alpha.v, *bravo.p, *bravo.v, *plat.bar_position(alpha),
               *ref.p, *ref.v, *u.a, *f_true, *f_pred, *self.obs_b.f_hat,
               err[2], float(np.linalg.norm(err)),
               1.0 if float(np.linalg.norm(dp)) < self.cfg.proximity else 0.0,
               PHASE_CODE[self.dock.phase], GATE_CODE[self.grip.gate]]
        if not all(math.isfinite(x) for x in row):
            raise dyn.SimulationFault(f"non-finite state at t={t:.3f}: bravo p={bravo.p}, v={bravo.v}")
        self.log.rows.append(row)

    def summary(self) -> RunSummary:
        arr = self.log.array()
        docked = self.dock.phase is DockPhase.DOCKED
        if docked:
            end = self.t_dock
        elif self.t_abort is not None:
            end = self.t_abort
        else:
            end = float(arr[-1, 0]) if len(arr) else 0.0
        t = arr[:, 0]
        win = (t >= end - METRIC_WINDOW - 1e-9) & (t <= end + 1e-9)
        if not win.any():
            win = t <= end + 1e-9
        sel = arr[win]
        f_pred = None
        if self.cfg.compensation in ("model", "observer", "model_observer"):
            f_pred = float(np.mean(np.linalg.norm(sel[:, _COL["f_pred_n"]:_COL["f_pred_d"] + 1], axis=1)))
        return RunSummary(
            result="Dock" if docked else "Miss",
            err_down=float(np.mean(np.abs(sel[:, _COL["err_down"]]))),
            err_3d=float(np.mean(sel[:, _COL["err_3d"]])),
            f_pred=f_pred, dock_time=self.t_dock, window_end=float(end),
            seed=self.cfg.seed, run_index=self.cfg.run_index, events=tuple(self.log.events))


def run_scenario(cfg: ScenarioConfig, model: MlpModel | None = None, **kw) -> tuple[SimLog, RunSummary]:
    """Run one scenario and return its log and summary.

    Raises
    ------
    InvalidParameterError
        Inconsistent configuration (e.g. model compensation without a model).
    SimulationFault
        A state became non-finite.
    """
    return Simulation(cfg, model, **kw).run()
