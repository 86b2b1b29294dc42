"""Synthetic downwash field used as ground truth by the simulator.

The leader's wake is a round jet whose centreline speed falls off as
``w0 z_c / (z_c + dz)`` with a Gaussian radial profile of width
``sigma0 + k_spread dz``. The follower sees an axial (down) acceleration
``c_a w^2`` and a radial push proportional to its offset from the axis.
Turbulence is an Ornstein-Uhlenbeck process whose stationary standard
deviation tracks the local mean magnitude.

Nothing in :mod:`aerodock.learning` may import this module's parameters;
the learner only sees residual labels.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .dynamics import InvalidParameterError


@dataclass(frozen=True)
class FieldParams:
    w0: float = 8.0
    z_c: float = 0.2
    sigma0: float = 0.15
    k_spread: float = 0.15
    c_a: float = 0.74
    lambda_r: float = 0.1
    turb_std_frac: float = 0.15
    turb_tau: float = 0.2

    def __post_init__(self):
        for name in ("w0", "z_c", "sigma0", "k_spread", "c_a", "turb_tau"):
            if not getattr(self, name) > 0.0:
                raise InvalidParameterError(f"{name} must be positive")
        if self.lambda_r < 0.0:
            raise InvalidParameterError("lambda_r must be non-negative")
        if not 0.0 <= self.turb_std_frac < 1.0:
            raise InvalidParameterError("turb_std_frac must lie in [0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)


class TurbulenceState:
    """OU state plus the generator that drives it (owned by one run)."""

    def __init__(self, rng: np.random.Generator, ou=None, seed: int | None = None):
        self.rng = rng
        self.ou = np.zeros(3) if ou is None else np.asarray(ou, dtype=float)
        self.seed = seed

    @classmethod
    def from_seed(cls, seed: int) -> "TurbulenceState":
        return cls(np.random.Generator(np.random.Philox(key=seed)), seed=seed)


def mean_force_at(dp, params: FieldParams) -> np.ndarray:
    """Mean acceleration for relative position ``dp = p_follower - p_leader``."""
    return kernels.downwash_mean(np.asarray(dp, dtype=float), params.w0, params.z_c,
                                 params.sigma0, params.k_spread, params.c_a,
                                 params.lambda_r)


def mean_force(leader, follower, params: FieldParams) -> np.ndarray:
    """Mean downwash acceleration on ``follower`` from ``leader`` (both VehicleState)."""
    return mean_force_at(follower.p - leader.p, params)


def sample_force(mean, turb: TurbulenceState, params: FieldParams, dt: float):
    """Advance the OU turbulence by ``dt`` and return ``(mean + ou, turb)``.

    Normal draws are consumed every call, even with zero intensity, so that
    runs differing only in the field see identical random streams.
    """
    if not dt > 0.0:
        raise InvalidParameterError("dt must be positive")
    mean = np.asarray(mean, dtype=float)
    decay = math.exp(-dt / params.turb_tau)
    std = params.turb_std_frac * float(np.linalg.norm(mean))
    noise = turb.rng.standard_normal(3)
    turb.ou = turb.ou * decay + std * math.sqrt(1.0 - decay * decay) * noise
    return mean + turb.ou, turb
