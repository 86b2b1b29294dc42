"""Rotation-invariant features of the relative state and the frame angle.

Horizontal quantities are projected onto the plane spanned by the
leader's first two body axes. ``h`` is invariant to rotations about the
leader's vertical axis; ``phi`` (the bearing of the projected offset)
carries the rotation so predictions can be mapped back equivariantly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EPS_DEG = 1e-6


@dataclass(frozen=True)
class RelativeState9:
    dp: np.ndarray   # p_follower - p_leader
    v_a: np.ndarray  # leader velocity
    v_b: np.ndarray  # follower velocity

    def as_array(self) -> np.ndarray:
        return np.concatenate((self.dp, self.v_a, self.v_b))

    @classmethod
    def from_array(cls, x) -> "RelativeState9":
        x = np.asarray(x, dtype=float)
        return cls(x[0:3].copy(), x[3:6].copy(), x[6:9].copy())

    @classmethod
    def between(cls, leader, follower) -> "RelativeState9":
        return cls(follower.p - leader.p, leader.v.copy(), follower.v.copy())

    def rotated(self, Rot: np.ndarray) -> "RelativeState9":
        return RelativeState9(Rot @ self.dp, Rot @ self.v_a, Rot @ self.v_b)


@dataclass(frozen=True)
class Features:
    h: np.ndarray
    phi: float


def wrap_pi(a):
    """Wrap to (-pi, pi] (scalar or array)."""
    w = np.mod(np.asarray(a, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    w = np.where(w <= -np.pi, w + 2.0 * np.pi, w)
    return float(w) if np.ndim(w) == 0 else w


def feature_map(x9: RelativeState9, R_EA) -> Features:
    R_EA = np.asarray(R_EA, dtype=float)
    dp_b = R_EA.T @ x9.dp
    vb_b = R_EA.T @ x9.v_b
    va_b = R_EA.T @ x9.v_a
    n_dp = math.hypot(dp_b[0], dp_b[1])
    n_vb = math.hypot(vb_b[0], vb_b[1])
    n_va = math.hypot(va_b[0], va_b[1])
    if n_dp > EPS_DEG and n_vb > EPS_DEG:
        cos_a = (dp_b[0] * vb_b[0] + dp_b[1] * vb_b[1]) / (n_dp * n_vb)
        cos_a = max(-1.0, min(1.0, cos_a))
    else:
        cos_a = 0.0
    phi = wrap_pi(math.atan2(dp_b[1], dp_b[0])) if n_dp > EPS_DEG else 0.0
    h = np.array([cos_a, n_dp, n_vb, dp_b[2], vb_b[2], n_va])
    return Features(h=h, phi=phi)


def feature_matrix(X9: np.ndarray, yaw=None):
    """Vectorised :func:`feature_map` for rows of ``[dp, v_a, v_b]``.

    ``yaw`` is the leader heading per row (yaw-only leader attitude);
    ``None`` means zero heading. Returns ``(H, phi)``.
    """
    X9 = np.asarray(X9, dtype=float)
    n = X9.shape[0]
    yaw = np.zeros(n) if yaw is None else np.broadcast_to(np.asarray(yaw, dtype=float), (n,))
    c, s = np.cos(yaw), np.sin(yaw)

    def body(v):
        return np.stack((c * v[:, 0] + s * v[:, 1], -s * v[:, 0] + c * v[:, 1], v[:, 2]), axis=1)

    dp, va, vb = body(X9[:, 0:3]), body(X9[:, 3:6]), body(X9[:, 6:9])
    n_dp = np.hypot(dp[:, 0], dp[:, 1])
    n_vb = np.hypot(vb[:, 0], vb[:, 1])
    n_va = np.hypot(va[:, 0], va[:, 1])
    ok = (n_dp > EPS_DEG) & (n_vb > EPS_DEG)
    denom = np.where(ok, n_dp * n_vb, 1.0)
    cos_a = np.where(ok, np.clip((dp[:, 0] * vb[:, 0] + dp[:, 1] * vb[:, 1]) / denom, -1.0, 1.0), 0.0)
    phi = np.where(n_dp > EPS_DEG, wrap_pi(np.arctan2(dp[:, 1], dp[:, 0])), 0.0)
    H = np.stack((cos_a, n_dp, n_vb, dp[:, 2], vb[:, 2], n_va), axis=1)
    return H, phi


def canonical_rotation(phi: float, R_EA) -> np.ndarray:
    """Rotation taking canonical-frame vectors to the inertial frame."""
    c, s = math.cos(phi), math.sin(phi)
    return np.asarray(R_EA, dtype=float) @ np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
