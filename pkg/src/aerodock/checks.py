"""Property suites behind ``aerodock check``.

Each suite returns a :class:`CheckResult` with the worst observed error
and the tolerance it was held to.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .control import LqrWeights, axis_gains, riccati_residual, solve_care_kleinman, solve_lqr
from .dynamics import linear_model
from .learning.features import RelativeState9, feature_map, wrap_pi
from .learning.network import MlpModel, predict


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    seconds: float

    def to_dict(self) -> dict:
        return asdict(self)


def _rot(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def check_equivariance(n: int = 100, seed: int = 0, tol: float = 1e-9) -> CheckResult:
    """Invariance of ``h``, shift of ``phi`` and equivariance of predictions."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    model = MlpModel.initialized(seed)
    model.params *= 3.0  # keep outputs well away from zero
    worst = 0.0
    for _ in range(n):
        x = RelativeState9.from_array(rng.normal(size=9))
        yaw = rng.uniform(-math.pi, math.pi)
        R_EA = _rot(yaw)
        theta = rng.uniform(-math.pi, math.pi)
        Rt = _rot(theta)
        xr = x.rotated(Rt)
        f0, f1 = feature_map(x, R_EA), feature_map(xr, R_EA)
        worst = max(worst, float(np.max(np.abs(f0.h - f1.h))))
        worst = max(worst, abs(wrap_pi(f1.phi - f0.phi - theta)))
        p0, p1 = predict(model, x, R_EA), predict(model, xr, R_EA)
        worst = max(worst, float(np.max(np.abs(p1 - Rt @ p0))))
    return CheckResult("equivariance", worst < tol, worst, tol, time.perf_counter() - t0)


def check_care(weights: LqrWeights | None = None, tol_gain: float = 1e-9,
               tol_residual: float = 1e-8) -> CheckResult:
    """Closed-form per-axis gains against a Kleinman iteration on the full model."""
    t0 = time.perf_counter()
    weights = weights or LqrWeights()
    lm = linear_model(0.7)
    gm = solve_lqr(weights, lm)
    P_ref, K_ref = solve_care_kleinman(lm.A, lm.B, weights.Q, weights.R)
    gain_err = float(np.max(np.abs(gm.K - K_ref)))
    for i in range(3):
        kp, kv = axis_gains(weights.q_p[i], weights.q_v[i], weights.r_a[i])
        gain_err = max(gain_err, abs(kp - gm.K[i, i]), abs(kv - gm.K[i, 3 + i]))
    res = riccati_residual(gm.P, lm.A, lm.B, weights.Q, weights.R)
    max_re = float(np.max(np.linalg.eigvals(lm.A - lm.B @ gm.K).real))
    ok = gain_err < tol_gain and res < tol_residual and max_re < 0.0
    return CheckResult("care", ok, max(gain_err, res), tol_gain, time.perf_counter() - t0)


def gradient_error(model: MlpModel, X, Y, h: float = 1e-6) -> float:
    """Relative error between analytic and central-difference gradients."""
    _, g = model.loss_and_grad(X, Y)
    fd = np.empty_like(g)
    p = model.params
    for i in range(p.size):
        old = p[i]
        p[i] = old + h
        lp = model.loss(X, Y)
        p[i] = old - h
        lm = model.loss(X, Y)
        p[i] = old
        fd[i] = (lp - lm) / (2.0 * h)
    return float(np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1e-12))


def check_gradients(draws: int = 10, seed: int = 0, tol: float = 1e-4) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(draws):
        model = MlpModel.initialized(seed + k)
        model.params += 0.1 * rng.normal(size=model.params.size)
        X = rng.normal(size=(16, model.sizes[0]))
        Y = rng.normal(size=(16, model.sizes[-1]))
        worst = max(worst, gradient_error(model, X, Y))
    return CheckResult("gradients", worst < tol, worst, tol, time.perf_counter() - t0)


def run_all() -> list[CheckResult]:
    return [check_equivariance(), check_care(), check_gradients()]
