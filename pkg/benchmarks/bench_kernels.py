"""Compare the compiled kernels with the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Prints per-call timings for each hot kernel and the wall time of a full
10 s docking scenario under each backend (the scenario is run in a
subprocess because the backend is chosen at import).
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from aerodock import _kernels_py

try:
    from aerodock import _kernels as _compiled
except ImportError:
    _compiled = None

SCENARIO = (
    "import time; from aerodock.sim.config import ScenarioConfig; "
    "from aerodock.sim.engine import run_scenario; t=time.perf_counter(); "
    "run_scenario(ScenarioConfig(compensation='none')); print(time.perf_counter()-t)"
)


def _cases(mod):
    rng = np.random.default_rng(0)
    R = np.eye(3)
    R_des = mod.so3_exp(np.array([0.05, -0.02, 0.3]))
    p, v, f = rng.normal(size=3), rng.normal(size=3), rng.normal(size=3)
    W = [rng.normal(size=s) for s in [(32, 6), (32,), (32, 32), (32,), (3, 32), (3,)]]
    h = rng.normal(size=6)
    dp = np.array([0.05, -0.02, 0.4])
    return {
        "vehicle_step": lambda: mod.vehicle_step(p, v, R, R_des, 7.0, 0.7, f, 0.002, 0.05, 9.81),
        "thrust_attitude": lambda: mod.thrust_attitude(np.array([0.5, -0.2, -1.0]), 0.3, 0.7, 9.81, 0.981),
        "downwash_mean": lambda: mod.downwash_mean(dp, 8.0, 0.2, 0.15, 0.15, 0.74, 0.1),
        "pendulum_step": lambda: mod.pendulum_step(np.array([0.0, 0.01, 0.36]), np.zeros(3),
                                                   np.zeros(3), 0.36, 0.5, 9.81, 0.002),
        "mlp_forward": lambda: mod.mlp_forward(h, *W),
    }


def _time(fn, repeat):
    n = 2000
    best = min(timeit.repeat(fn, number=n, repeat=repeat))
    return best / n * 1e6


def _scenario(pure: bool) -> float:
    env = dict(os.environ, AERODOCK_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", SCENARIO], env=env, check=True,
                         capture_output=True, text=True)
    return float(out.stdout.strip())


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", action="store_true", help="print JSON instead of a table")
    args = ap.parse_args(argv)
    py = _cases(_kernels_py)
    co = _cases(_compiled) if _compiled is not None else {}
    rows = []
    for name in py:
        t_py = _time(py[name], args.repeat)
        t_co = _time(co[name], args.repeat) if co else float("nan")
        rows.append({"kernel": name, "python_us": t_py, "compiled_us": t_co, "speedup": t_py / t_co})
    s_py = _scenario(True)
    s_co = _scenario(False) if _compiled is not None else float("nan")
    rows.append({"kernel": "scenario_10s", "python_us": s_py * 1e6, "compiled_us": s_co * 1e6,
                 "speedup": s_py / s_co})
    if args.json:
        print(json.dumps(rows, indent=2))
        return 0
    print(f"{'kernel':<16}{'python [us]':>14}{'compiled [us]':>16}{'speedup':>10}")
    for r in rows:
        print(f"{r['kernel']:<16}{r['python_us']:>14.2f}{r['compiled_us']:>16.2f}{r['speedup']:>10.2f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
