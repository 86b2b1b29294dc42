"""Residual labels: observed minus commanded acceleration, bias removed."""
from __future__ import annotations

import numpy as np


def make_label(a_obs, u_cmd, bias=None) -> np.ndarray:
    """``a_obs - u_cmd.a - bias``; ``u_cmd`` is a ``ControlInput`` or a 3-vector."""
    a_cmd = getattr(u_cmd, "a", u_cmd)
    b = np.zeros(3) if bias is None else np.asarray(bias, dtype=float)
    return np.asarray(a_obs, dtype=float) - np.asarray(a_cmd, dtype=float) - b


def estimate_bias(residuals) -> np.ndarray:
    """Mean residual over a disturbance-free segment, shape ``(3,)``."""
    r = np.asarray(residuals, dtype=float).reshape(-1, 3)
    if r.shape[0] == 0:
        raise ValueError("bias estimate needs at least one residual")
    return r.mean(axis=0)
