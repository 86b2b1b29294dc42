"""Static-offset, hover-docking and moving-leader experiment sweeps.

Runs are independent; with ``workers > 1`` they execute in a process pool
and results are collected in submission order, so parallel and serial
sweeps return identical values.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..learning.network import MlpModel
from .config import ScenarioConfig
from .engine import _COL, RunSummary, SimLog, run_rng, run_scenario
from .outputs import write_outputs

STATIC_OFFSETS = (0.36, 0.47, 0.64, 0.87, 1.11, 1.35)
STATIC_START = (-1.2, 0.0, 0.6)   # lateral start, and height below the bar
HOVER_JITTER_POS = 0.3
HOVER_JITTER_VEL = 0.1
ENTRY_WINDOW = (4.0, 6.0)
HOLD_WINDOW = (6.0, 11.0)


def _job(args):
    cfg, model, out_dir, keep_log = args
    log, summary = run_scenario(cfg, model if cfg.compensation == "model" else None)
    if out_dir is not None:
        write_outputs(log, summary, out_dir)
    return (log if keep_log else None), summary


def run_many(cfgs, model: MlpModel | None, workers: int = 1, out_dirs=None,
             keep_logs: bool = False) -> list[tuple[SimLog | None, RunSummary]]:
    out_dirs = out_dirs or [None] * len(cfgs)
    jobs = [(c, model, d, keep_logs) for c, d in zip(cfgs, out_dirs)]
    if workers <= 1 or len(jobs) <= 1:
        return [_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_job, jobs))


def _sub(out, name):
    return None if out is None else Path(out) / name


# -- static offsets ---------------------------------------------------------

def static_configs(offsets, cfg: ScenarioConfig):
    pairs = []
    for i, off in enumerate(offsets):
        base = cfg.replace(leader_mode="rigid", mission="dock", d_p=float(off),
                           start_offset=(STATIC_START[0], STATIC_START[1], float(off) + STATIC_START[2]),
                           start_velocity=(0.0, 0.0, 0.0), run_index=i)
        pairs.append((base.replace(compensation="none"), base.replace(compensation="model")))
    return pairs


def exp_static_offsets(offsets=STATIC_OFFSETS, cfg: ScenarioConfig = ScenarioConfig(),
                       model: MlpModel | None = None, workers: int = 1, out_dir=None):
    """Dock below a rigidly mounted leader at each cable offset, without and with the model.

    Returns a list of ``(offset, without_summary, with_summary)``.
    """
    pairs = static_configs(offsets, cfg)
    cfgs = [c for p in pairs for c in p]
    dirs = [_sub(out_dir, f"offset_{off:.2f}_{tag}") for off in offsets for tag in ("without", "with")]
    res = run_many(cfgs, model, workers, dirs if out_dir else None)
    return [(off, res[2 * i][1], res[2 * i + 1][1]) for i, off in enumerate(offsets)]


# -- hover docking ------------------------------------------------------------

def hover_configs(n: int, cfg: ScenarioConfig):
    """Starts rotated through four headings about the leader, with jitter."""
    out = []
    base = np.array(cfg.start_offset)
    for i in range(n):
        rng = run_rng(cfg.seed, i, stream=1)
        th = 0.5 * math.pi * (i % 4)
        c, s = math.cos(th), math.sin(th)
        p = np.array([c * base[0] - s * base[1], s * base[0] + c * base[1], base[2]])
        p = p + rng.uniform(-HOVER_JITTER_POS, HOVER_JITTER_POS, 3)
        v = rng.uniform(-HOVER_JITTER_VEL, HOVER_JITTER_VEL, 3)
        out.append(cfg.replace(leader_mode="hover", mission="dock", start_offset=tuple(p),
                               start_velocity=tuple(v), run_index=i))
    return out


@dataclass(frozen=True)
class HoverResult:
    docks: int
    summaries: tuple

    def to_dict(self) -> dict:
        return {"docks": self.docks, "runs": len(self.summaries),
                "summaries": [s.to_dict() for s in self.summaries]}


def exp_hover_docking(n: int, cfg: ScenarioConfig = ScenarioConfig(), model: MlpModel | None = None,
                      workers: int = 1, out_dir=None) -> HoverResult:
    if n < 1:
        raise ValueError("need at least one run")
    cfgs = hover_configs(n, cfg)
    dirs = [_sub(out_dir, f"run_{i:03d}") for i in range(n)] if out_dir else None
    res = run_many(cfgs, model, workers, dirs)
    sums = tuple(s for _, s in res)
    return HoverResult(sum(s.result == "Dock" for s in sums), sums)


# -- moving leader ------------------------------------------------------------

MOVING_DEFAULTS = dict(leader_mode="constant_velocity", mission="formation", leader_speed=0.25,
                       t_h=6.0, duration=11.0, start_offset=(-0.3, -1.4, 1.1))


def moving_config(cfg: ScenarioConfig) -> ScenarioConfig:
    return cfg.replace(**MOVING_DEFAULTS)


@dataclass(frozen=True)
class MovingResult:
    t: np.ndarray
    curves: dict          # mode -> mean signed altitude error per tick
    curves_3d: dict       # mode -> mean 3D error per tick
    entry: dict           # mode -> mean |altitude error| over the entry window
    hold: dict            # mode -> mean |altitude error| over the hold window
    hold_3d: dict         # mode -> mean 3D error over the hold window

    def to_dict(self) -> dict:
        return {"entry_window": list(ENTRY_WINDOW), "hold_window": list(HOLD_WINDOW),
                "entry_alt_err": self.entry, "hold_alt_err": self.hold, "hold_3d_err": self.hold_3d}

    def table(self) -> list[list]:
        modes = list(self.curves)
        rows = []
        for k, t in enumerate(self.t):
            rows.append([float(t)] + [float(self.curves[m][k]) for m in modes]
                        + [float(self.curves_3d[m][k]) for m in modes])
        return rows


def exp_moving_leader(cfg: ScenarioConfig = ScenarioConfig(), model: MlpModel | None = None,
                      runs: int = 1, modes=("none", "model", "observer"), workers: int = 1,
                      out_dir=None) -> MovingResult:
    """Meet a cruising leader at ``t_h`` then hold formation; error curves averaged over runs."""
    base = moving_config(cfg)
    if model is None:
        modes = tuple(m for m in modes if m != "model")
    cfgs = [base.replace(compensation=m, run_index=i) for m in modes for i in range(runs)]
    dirs = [_sub(out_dir, f"{m}_run_{i:03d}") for m in modes for i in range(runs)] if out_dir else None
    res = run_many(cfgs, model, workers, dirs, keep_logs=True)
    t = res[0][0].array()[:, 0]
    curves, curves3, entry, hold, hold3 = {}, {}, {}, {}, {}
    for j, m in enumerate(modes):
        arrs = [res[j * runs + i][0].array() for i in range(runs)]
        curves[m] = np.mean([a[:, _COL["err_down"]] for a in arrs], axis=0)
        curves3[m] = np.mean([a[:, _COL["err_3d"]] for a in arrs], axis=0)
        ew = (t >= ENTRY_WINDOW[0] - 1e-9) & (t <= ENTRY_WINDOW[1] + 1e-9)
        hw = (t >= HOLD_WINDOW[0] - 1e-9) & (t <= HOLD_WINDOW[1] + 1e-9)
        entry[m] = float(np.mean(np.abs(curves[m][ew])))
        hold[m] = float(np.mean(np.abs(curves[m][hw])))
        hold3[m] = float(np.mean(curves3[m][hw]))
    return MovingResult(t, curves, curves3, entry, hold, hold3)
