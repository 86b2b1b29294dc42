"""Scenario configuration: JSON file plus dotted-key overrides.

Schema (all keys optional, defaults below). ``field`` and ``lqr`` are
nested objects with the keys of :class:`~aerodock.downwash.FieldParams`
and :class:`~aerodock.control.LqrWeights`. Vectors are JSON arrays in
NED metres or metres per second.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from dataclasses import field as dc_field
from pathlib import Path

from ..control import LqrWeights
from ..downwash import FieldParams
from ..dynamics import InvalidParameterError

LEADER_MODES = ("rigid", "hover", "constant_velocity")
MISSIONS = ("dock", "formation")
COMPENSATION = ("none", "model", "oracle", "observer", "model_observer")


@dataclass(frozen=True)
class ScenarioConfig:
    mass_alpha: float = 0.7
    mass_bravo: float = 0.7
    body_length: float = 0.27
    field: FieldParams = dc_field(default_factory=FieldParams)
    field_enabled: bool = True
    turbulence: bool = True
    lqr: LqrWeights = dc_field(default_factory=LqrWeights)
    a_max: float = 8.0
    tau_att: float = 0.05

    d_p: float = 0.36
    aperture: float = 0.1
    eps_contact: float = 0.02
    latency: float = 0.015
    tau_servo: float = 0.06
    tau_ramp: float = 1.0
    proximity: float = 0.54
    tip_offset: tuple = (0.0, 0.0, -0.14)   # gripper tip above the follower's centre
    attach: tuple = (0.0, 0.0, 0.0)
    bar_length: float = 0.2
    bar_damping_ratio: float = 0.05
    engage_depth: float = 0.02  # dock goal puts the tip this far past the bar (upward)

    mission: str = "dock"
    t_h: float = 4.0
    abort_margin: float = 2.0
    descent: float = 1.0
    descent_time: float = 2.0

    leader_mode: str = "hover"
    leader_start: tuple = (0.0, 0.0, -2.5)
    leader_speed: float = 0.25
    leader_heading: float = 0.0
    leader_yaw: float = 0.0
    start_offset: tuple = (-1.2, 0.0, 0.9)
    start_velocity: tuple = (0.0, 0.0, 0.0)

    compensation: str = "model"
    model_path: str | None = None
    seed: int = 0
    run_index: int = 0
    duration: float = 10.0
    physics_hz: int = 500
    control_hz: int = 50
    accel_bias: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        for name in ("tip_offset", "attach", "leader_start", "start_offset",
                     "start_velocity", "accel_bias"):
            v = tuple(float(x) for x in getattr(self, name))
            if len(v) != 3:
                raise InvalidParameterError(f"{name} must have three components")
            object.__setattr__(self, name, v)
        for name in ("mass_alpha", "mass_bravo", "body_length", "d_p", "aperture", "eps_contact",
                     "proximity", "bar_length", "t_h", "duration", "a_max", "descent_time"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0.0):
                raise InvalidParameterError(f"{name} must be positive, got {val!r}")
        for name in ("latency", "tau_servo", "tau_ramp", "tau_att", "abort_margin", "leader_speed",
                     "engage_depth"):
            if not getattr(self, name) >= 0.0:
                raise InvalidParameterError(f"{name} must be non-negative")
        if self.leader_mode not in LEADER_MODES:
            raise InvalidParameterError(f"leader_mode must be one of {LEADER_MODES}")
        if self.mission not in MISSIONS:
            raise InvalidParameterError(f"mission must be one of {MISSIONS}")
        if self.compensation not in COMPENSATION:
            raise InvalidParameterError(f"compensation must be one of {COMPENSATION}")
        if self.physics_hz <= 0 or self.control_hz <= 0 or self.physics_hz % self.control_hz:
            raise InvalidParameterError("physics rate must be a positive multiple of control rate")
        if self.physics_hz < 100:
            raise InvalidParameterError("physics rate must be at least 100 Hz")

    @property
    def dt(self) -> float:
        return 1.0 / self.physics_hz

    @property
    def dt_control(self) -> float:
        return 1.0 / self.control_hz

    @property
    def substeps(self) -> int:
        return self.physics_hz // self.control_hz

    def field_params(self) -> FieldParams:
        return self.field if self.turbulence else dataclasses.replace(self.field, turb_std_frac=0.0)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if hasattr(v, "to_dict"):
                v = v.to_dict()
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        d = dict(d)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidParameterError(f"unknown config keys: {sorted(unknown)}")
        if "field" in d and isinstance(d["field"], dict):
            d["field"] = FieldParams(**d["field"])
        if "lqr" in d and isinstance(d["lqr"], dict):
            d["lqr"] = LqrWeights.from_dict(d["lqr"])
        return cls(**d)


def load_config(path=None, overrides: dict | None = None) -> ScenarioConfig:
    """Read a JSON config (or defaults when ``path`` is None) and apply overrides.

    Override keys may be dotted (``field.w0``) to reach nested objects.
    """
    data: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise OSError(f"{path}: {exc.strerror}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidParameterError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise InvalidParameterError(f"{path}: top level must be an object")
    for key, value in (overrides or {}).items():
        node = data
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = value
    return ScenarioConfig.from_dict(data)


def parse_override(text: str) -> tuple[str, object]:
    """``key=value`` with ``value`` parsed as JSON when possible."""
    if "=" not in text:
        raise InvalidParameterError(f"override must look like key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value
