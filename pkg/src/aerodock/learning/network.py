"""Small fully connected tanh network with hand-written backpropagation.

Parameters live in one flat vector; the weight matrices are views into
it, which keeps the optimizer a handful of vector operations.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from .features import RelativeState9, canonical_rotation, feature_map

SIZES = (6, 32, 32, 3)
F_MAX = 12.0
FORMAT_VERSION = 1
MAGIC = b"AERODOCK-MLP\n"


class ModelFormatError(ValueError):
    """Model file is malformed or from an incompatible format version."""


def _shapes(sizes):
    out = []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        out.append((n_out, n_in))
        out.append((n_out,))
    return out


@dataclass
class MlpModel:
    sizes: tuple = SIZES
    params: np.ndarray = None
    activation: str = "tanh"
    f_max: float = F_MAX
    in_shift: np.ndarray = field(default_factory=lambda: np.zeros(SIZES[0]))
    in_scale: np.ndarray = field(default_factory=lambda: np.ones(SIZES[0]))
    out_scale: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.sizes = tuple(int(s) for s in self.sizes)
        if len(self.sizes) != 4:
            raise ValueError("expected two hidden layers")
        n = sum(int(np.prod(s)) for s in _shapes(self.sizes))
        if self.params is None:
            self.params = np.zeros(n)
        self.params = np.ascontiguousarray(self.params, dtype=float)
        if self.params.shape != (n,):
            raise ValueError(f"expected {n} parameters, got {self.params.shape}")
        self.in_shift = np.asarray(self.in_shift, dtype=float)
        self.in_scale = np.asarray(self.in_scale, dtype=float)
        self.out_scale = float(self.out_scale)

    @property
    def layers(self):
        """``[W1, b1, W2, b2, W3, b3]`` as views into :attr:`params`."""
        out, i = [], 0
        for shape in _shapes(self.sizes):
            k = int(np.prod(shape))
            out.append(self.params[i:i + k].reshape(shape))
            i += k
        return out

    @classmethod
    def initialized(cls, seed: int, sizes=SIZES, **kw) -> "MlpModel":
        rng = np.random.default_rng(seed)
        chunks = []
        for shape in _shapes(sizes):
            if len(shape) == 2:
                lim = np.sqrt(6.0 / (shape[0] + shape[1]))
                chunks.append(rng.uniform(-lim, lim, size=shape).ravel())
            else:
                chunks.append(np.zeros(shape))
        return cls(sizes=sizes, params=np.concatenate(chunks), **kw)

    def copy(self) -> "MlpModel":
        return MlpModel(self.sizes, self.params.copy(), self.activation, self.f_max,
                        self.in_shift.copy(), self.in_scale.copy(), self.out_scale,
                        json.loads(json.dumps(self.meta)))

    # -- batch evaluation / gradients ------------------------------------

    def normalize(self, H):
        return (np.asarray(H, dtype=float) - self.in_shift) / self.in_scale

    def forward(self, X):
        """Raw outputs for normalized inputs ``X`` (N, 6), before output scaling."""
        W1, b1, W2, b2, W3, b3 = self.layers
        z1 = np.tanh(X @ W1.T + b1)
        z2 = np.tanh(z1 @ W2.T + b2)
        return z2 @ W3.T + b3

    def loss_and_grad(self, X, Y):
        """Mean squared error over all outputs and its gradient w.r.t. ``params``.

        ``Y`` is in output-scaled units (targets divided by ``out_scale``).
        """
        W1, b1, W2, b2, W3, b3 = self.layers
        z1 = np.tanh(X @ W1.T + b1)
        z2 = np.tanh(z1 @ W2.T + b2)
        out = z2 @ W3.T + b3
        err = out - Y
        loss = float(np.mean(err * err))
        d_out = (2.0 / err.size) * err
        gW3 = d_out.T @ z2
        gb3 = d_out.sum(axis=0)
        d2 = (d_out @ W3) * (1.0 - z2 * z2)
        gW2 = d2.T @ z1
        gb2 = d2.sum(axis=0)
        d1 = (d2 @ W2) * (1.0 - z1 * z1)
        gW1 = d1.T @ X
        gb1 = d1.sum(axis=0)
        grad = np.concatenate([gW1.ravel(), gb1, gW2.ravel(), gb2, gW3.ravel(), gb3])
        return loss, grad

    def loss(self, X, Y) -> float:
        err = self.forward(X) - Y
        return float(np.mean(err * err))

    # -- single-sample inference -----------------------------------------

    def canonical(self, h) -> np.ndarray:
        W1, b1, W2, b2, W3, b3 = self.layers
        x = (np.asarray(h, dtype=float) - self.in_shift) / self.in_scale
        return kernels.mlp_forward(x, W1, b1, W2, b2, W3, b3) * self.out_scale

    # -- persistence -----------------------------------------------------

    def header(self) -> dict:
        return {"format": "aerodock-mlp", "version": FORMAT_VERSION,
                "sizes": list(self.sizes), "activation": self.activation,
                "f_max": self.f_max, "in_shift": self.in_shift.tolist(),
                "in_scale": self.in_scale.tolist(), "out_scale": self.out_scale,
                "n_params": int(self.params.size), "meta": self.meta}

    def save(self, path) -> None:
        head = json.dumps(self.header(), sort_keys=True).encode()
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", len(head)))
            fh.write(head)
            fh.write(self.params.astype("<f8").tobytes())

    @classmethod
    def load(cls, path) -> "MlpModel":
        with open(path, "rb") as fh:
            blob = fh.read()
        if not blob.startswith(MAGIC):
            raise ModelFormatError(f"{path}: not an aerodock model file")
        off = len(MAGIC)
        (n_head,) = struct.unpack("<I", blob[off:off + 4])
        off += 4
        try:
            head = json.loads(blob[off:off + n_head])
        except ValueError as exc:
            raise ModelFormatError(f"{path}: corrupt header") from exc
        if head.get("version") != FORMAT_VERSION:
            raise ModelFormatError(
                f"{path}: model format version {head.get('version')} != {FORMAT_VERSION}")
        if head.get("activation") != "tanh":
            raise ModelFormatError(f"{path}: unsupported activation {head.get('activation')}")
        params = np.frombuffer(blob[off + n_head:], dtype="<f8").astype(float)
        if params.size != head["n_params"]:
            raise ModelFormatError(f"{path}: expected {head['n_params']} parameters, found {params.size}")
        return cls(sizes=tuple(head["sizes"]), params=params, activation=head["activation"],
                   f_max=head["f_max"], in_shift=np.array(head["in_shift"]),
                   in_scale=np.array(head["in_scale"]), out_scale=head["out_scale"],
                   meta=head.get("meta", {}))


def predict(model: MlpModel, x9: RelativeState9, R_EA) -> np.ndarray:
    """Predicted downwash acceleration (inertial frame), clamped to ``f_max``."""
    feats = feature_map(x9, R_EA)
    f = canonical_rotation(feats.phi, R_EA) @ model.canonical(feats.h)
    n = float(np.linalg.norm(f))
    if n > model.f_max:
        f = f * (model.f_max / n)
    return f
