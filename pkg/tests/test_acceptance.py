"""End-to-end acceptance criteria.

Each test records a one-line outcome that is printed in the terminal
summary. Sub-criteria the simulator does not reach are marked xfail and
reported as FAIL there.
"""
import json
import time

import numpy as np
import pytest

from conftest import record

from aerodock.checks import check_care, check_equivariance, check_gradients
from aerodock.cli import main
from aerodock.docking import GripperState, gripper_step
from aerodock.learning.training import block_split, rmse
from aerodock.sim import experiments as ex
from aerodock.sim.config import ScenarioConfig
from aerodock.sim.engine import _COL, run_scenario


def _timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


# -- property suites -----------------------------------------------------------

def test_c1_equivariance():
    r = check_equivariance()
    ok = r.passed and r.seconds < 1.0
    record(1, ok, f"worst {r.worst:.1e} (tol 1e-9), {r.seconds:.2f} s")
    assert ok


def test_c2_care():
    r = check_care()
    ok = r.passed and r.seconds < 1.0
    record(2, ok, f"worst {r.worst:.1e}, {r.seconds:.2f} s")
    assert ok


def test_c3_gradients():
    r = check_gradients()
    ok = r.passed and r.seconds < 10.0
    record(3, ok, f"worst rel err {r.worst:.1e} (tol 1e-4), {r.seconds:.2f} s")
    assert ok


# -- exact cancellation --------------------------------------------------------

def test_c4_exact_cancellation():
    cfg = ScenarioConfig(tau_att=0.0)
    la, sa = run_scenario(cfg.replace(compensation="oracle"))
    lb, sb = run_scenario(cfg.replace(compensation="none", field_enabled=False))
    a, b = la.array(), lb.array()
    t = a[:, 0]
    end = min(x for x in (sa.dock_time, sb.dock_time, t[-1]) if x is not None)
    track = t <= end
    err = slice(_COL["bravo_n"], _COL["bravo_d"] + 1)
    ref = slice(_COL["ref_n"], _COL["ref_d"] + 1)
    dev = np.abs((a[track, err] - a[track, ref]) - (b[track, err] - b[track, ref])).max()
    # the field does act during the approach, so the comparison is not vacuous
    f_max = np.abs(a[track, _COL["f_true_d"]]).max()
    ok = dev < 1e-6 and f_max > 1.0
    record(4, ok, f"max tracking-error difference {dev:.1e} m over {track.sum()} ticks "
                  f"(field up to {f_max:.1f} m/s^2)")
    assert ok


# -- experiments with the trained model ----------------------------------------

@pytest.fixture(scope="module")
def static(model):
    return _timed(ex.exp_static_offsets, ex.STATIC_OFFSETS, ScenarioConfig(), model)


def test_c5_static_without_model_misses(static):
    res, secs = static
    misses = sum(wo.result == "Miss" for _, wo, _ in res)
    ok = misses == 6 and secs < 60.0
    record(5, ok, f"without model {misses}/6 Miss ({secs:.1f} s)")
    assert ok


def test_c5_static_error_ratio(static):
    res, _ = static
    ratios = [wi.err_down / wo.err_down for _, wo, wi in res]
    ok = max(ratios) <= 0.55
    record(5, ok, "down-error ratio " + " ".join(f"{r:.2f}" for r in ratios) + " (<= 0.55)")
    assert ok


@pytest.mark.xfail(strict=False, reason="lateral model bias near the axis; see README")
def test_c5_static_with_model_docks(static):
    res, _ = static
    docks = sum(wi.result == "Dock" for _, _, wi in res)
    record(5, docks == 6, f"with model {docks}/6 Dock")
    assert docks == 6


def test_c6_hover_without_model():
    r = ex.exp_hover_docking(10, ScenarioConfig(compensation="none"))
    record(6, r.docks == 0, f"without model {r.docks}/10")
    assert r.docks == 0


def test_c6_hover_no_turbulence(model):
    r = ex.exp_hover_docking(10, ScenarioConfig(turbulence=False), model)
    record(6, r.docks == 10, f"turbulence off {r.docks}/10")
    assert r.docks == 10


@pytest.mark.xfail(strict=False, reason="turbulence spread at the bar exceeds the aperture margin")
def test_c6_hover_with_model(model):
    r = ex.exp_hover_docking(10, ScenarioConfig(), model)
    record(6, r.docks >= 8, f"with model {r.docks}/10 (>= 8)")
    assert r.docks >= 8


@pytest.fixture(scope="module")
def moving(model):
    return _timed(ex.exp_moving_leader, ScenarioConfig(), model, runs=5)


def test_c7_moving_altitude(moving):
    r, secs = moving
    ok = (r.entry["none"] > 0.2 and r.entry["model"] < 0.05 and r.hold["model"] < 0.05
          and r.hold["model"] <= r.hold["none"] / 3.0 and r.entry["model"] <= r.entry["none"] / 3.0
          and secs < 20.0)
    record(7, ok, f"altitude entry none {r.entry['none']:.3f} model {r.entry['model']:.3f}, "
                  f"hold model {r.hold['model']:.3f} none {r.hold['none']:.3f} ({secs:.1f} s)")
    assert ok


def test_c7_observer_baseline(moving):
    r, _ = moving
    t = r.t
    obs = np.abs(r.curves["observer"])
    early = obs[(t >= 6.0) & (t <= 7.0)].mean()
    late = obs[(t >= 10.0) & (t <= 11.0)].mean()
    ok = late < early and r.hold["observer"] > r.hold["model"]
    record(7, ok, f"observer hold {r.hold['observer']:.3f} (decays {early:.3f} -> {late:.3f})")
    assert ok


@pytest.mark.xfail(strict=False, reason="turbulence noise floor is about 0.12 m in 3D")
def test_c7_moving_3d(moving):
    r, _ = moving
    ok = r.hold_3d["model"] < 0.06
    record(7, ok, f"hold 3D model {r.hold_3d['model']:.3f} (< 0.06)")
    assert ok


def test_c8_curriculum_benefit(curriculum):
    ds = curriculum.dataset
    band = block_split(len(ds)) & (ds.stage == 4)
    held_out = ds.subset(band)
    final = rmse(curriculum.model, held_out)
    first = rmse(curriculum.stage_models[0], held_out)
    ok = final < first and abs(curriculum.duration - 300.0) <= 10.0 and len(held_out) > 100
    record(8, ok, f"0.5-0.6 m band RMSE final {final:.3f} vs stage-0 {first:.3f}; "
                  f"collected {curriculum.duration:.1f} s")
    assert ok


# -- coupling and gripper ------------------------------------------------------

def test_c9_post_dock_dip_and_recovery(model):
    log, s = run_scenario(ScenarioConfig(), model)
    assert s.result == "Dock"
    a = log.array()
    t, alt = a[:, 0], a[:, _COL["alpha_d"]] + 2.5
    after = t >= s.dock_time
    dip = alt[after].max()
    settled = np.abs(alt[t >= t[-1] - 1.0]).max()
    ok = dip > 0.02 and settled < 0.05
    record(9, ok, f"dock: Alpha dip {dip:.3f} m, settles to {settled:.4f} m")
    assert ok


def test_c9_miss_leaves_leader_alone():
    log, s = run_scenario(ScenarioConfig(compensation="none"))
    assert s.result == "Miss"
    a = log.array()
    t = a[:, 0]
    dev = np.abs(a[t >= s.window_end, _COL["alpha_d"]] + 2.5).max()
    bravo = a[:, _COL["bravo_d"]]
    descended = bravo[-1] - bravo[t <= s.window_end][-1]
    ok = dev < 0.05 and descended > 0.5
    record(9, ok, f"miss: Alpha deviation {dev:.4f} m, Bravo descends {descended:.2f} m")
    assert ok


def test_c10_gripper_timing():
    dt = 0.002
    grip, events = GripperState(), []
    for k in range(1, 200):
        t = k * dt
        rel = np.zeros(3) if t >= 0.1 - 1e-12 else np.array([0.0, 0.0, 0.05])
        grip, ev = gripper_step(grip, rel, np.zeros(3), t, dt)
        events += [ev] if ev else []
    dock_gap = events[1].t - events[0].t
    ok_dock = [e.type for e in events] == ["contact", "docked"] and abs(dock_gap - 0.075) < 1e-12

    grip, events = GripperState(), []
    for k in range(1, 200):
        t = k * dt
        grip, ev = gripper_step(grip, np.array([0.0, 0.0, -0.03 + 2.0 * t]), np.array([0.0, 0.0, 2.0]), t, dt)
        events += [ev] if ev else []
    ok_miss = [e.type for e in events] == ["contact", "missed"]
    ok = ok_dock and ok_miss
    record(10, ok, f"dock {dock_gap * 1e3:.1f} ms after contact; 2 m/s crossing -> "
                   f"{events[-1].type if events else 'none'}")
    assert ok


def test_c10_timeline_in_simulation(model):
    log, s = run_scenario(ScenarioConfig(), model)
    kinds = {e.type: e.t for e in log.events}
    gap = kinds["docked"] - kinds["contact"]
    ok = abs(gap - 0.075) < 1e-9
    record(10, ok, f"simulated dock {gap * 1e3:.1f} ms after contact")
    assert ok


# -- determinism -----------------------------------------------------------------

def _tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_c11_determinism(tmp_path, model, capsys):
    mpath = tmp_path / "model.bin"
    model.save(mpath)
    outs = []
    for tag, workers in (("a", 1), ("b", 1), ("c", 2)):
        for kind, runs in (("hover", 3), ("static", 1), ("moving", 2)):
            code = main(["exp", kind, "--model", str(mpath), "--runs", str(runs),
                         "--workers", str(workers), "--out", str(tmp_path / tag / kind)])
            assert code == 0
        outs.append(_tree(tmp_path / tag))
    capsys.readouterr()
    n_files = len(outs[0])
    same = outs[0] == outs[1] == outs[2]
    record(11, same, f"{n_files} files byte-identical across two serial runs and a 2-worker run")
    assert same and n_files > 20
