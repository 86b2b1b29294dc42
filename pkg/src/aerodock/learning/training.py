"""Mini-batch Adam training of the downwash network."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..dynamics import InvalidParameterError
from .features import feature_matrix
from .network import MlpModel


@dataclass(frozen=True)
class TrainHyper:
    epochs: int = 2000
    batch: int = 256
    lr: float = 1e-3
    seed: int = 0
    n_blocks: int = 10
    val_blocks: tuple = (4, 9)
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


@dataclass
class Dataset:
    """Samples in canonical order (time within stage, stages ascending)."""
    X9: np.ndarray
    Y: np.ndarray
    stage: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        self.X9 = np.asarray(self.X9, dtype=float).reshape(-1, 9)
        self.Y = np.asarray(self.Y, dtype=float).reshape(-1, 3)
        self.stage = np.asarray(self.stage, dtype=int).reshape(-1)
        self.t = np.asarray(self.t, dtype=float).reshape(-1)
        if not (len(self.X9) == len(self.Y) == len(self.stage) == len(self.t)):
            raise InvalidParameterError("dataset columns differ in length")

    def __len__(self) -> int:
        return len(self.Y)

    @classmethod
    def empty(cls) -> "Dataset":
        return cls(np.zeros((0, 9)), np.zeros((0, 3)), np.zeros(0, int), np.zeros(0))

    def concat(self, other: "Dataset") -> "Dataset":
        return Dataset(np.vstack((self.X9, other.X9)), np.vstack((self.Y, other.Y)),
                       np.concatenate((self.stage, other.stage)), np.concatenate((self.t, other.t)))

    def subset(self, mask) -> "Dataset":
        return Dataset(self.X9[mask], self.Y[mask], self.stage[mask], self.t[mask])

    def duration(self, dt: float) -> float:
        return len(self) * dt


@dataclass(frozen=True)
class TrainingSample:
    x9: np.ndarray
    label: np.ndarray
    stage: int = 0


@dataclass
class TrainResult:
    model: MlpModel
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)


def block_split(n: int, n_blocks: int = 10, val_blocks=(4, 9)):
    """Boolean validation mask from contiguous index blocks."""
    edges = np.linspace(0, n, n_blocks + 1).round().astype(int)
    val = np.zeros(n, dtype=bool)
    for b in val_blocks:
        val[edges[b]:edges[b + 1]] = True
    return val


def canonical_targets(X9, Y, yaw=None):
    """Features and labels rotated into the per-sample canonical frame."""
    H, phi = feature_matrix(X9, yaw)
    ang = -phi if yaw is None else -(phi + np.asarray(yaw, dtype=float))
    c, s = np.cos(ang), np.sin(ang)
    Yc = np.stack((c * Y[:, 0] - s * Y[:, 1], s * Y[:, 0] + c * Y[:, 1], Y[:, 2]), axis=1)
    return H, Yc


def _as_dataset(samples) -> Dataset:
    if isinstance(samples, Dataset):
        return samples
    samples = list(samples)
    if not samples:
        return Dataset.empty()
    X9 = [s.x9.as_array() if hasattr(s.x9, "as_array") else s.x9 for s in samples]
    return Dataset(np.asarray(X9, dtype=float), np.array([s.label for s in samples]),
                   np.array([s.stage for s in samples]), np.arange(len(samples), dtype=float))


def _phys_mse(model: MlpModel, X, Y) -> float:
    err = (model.forward(X) - Y) * model.out_scale
    return float(np.mean(err * err))


def train(samples, hyper: TrainHyper = TrainHyper(), init: MlpModel | None = None) -> TrainResult:
    """Fit an :class:`MlpModel` to residual labels.

    Leader heading is taken as zero for every row. Deterministic for a
    given ``hyper.seed``.
    """
    ds = _as_dataset(samples)
    if len(ds) == 0:
        raise InvalidParameterError("cannot train on an empty dataset")
    H, Yc = canonical_targets(ds.X9, ds.Y)
    val = block_split(len(ds), hyper.n_blocks, hyper.val_blocks) if len(ds) >= 2 * hyper.n_blocks \
        else np.zeros(len(ds), dtype=bool)
    tr = ~val
    shift = H[tr].mean(axis=0)
    scale = H[tr].std(axis=0)
    scale = np.where(scale > 1e-9, scale, 1.0)
    out_scale = float(max(np.sqrt(np.mean(Yc[tr] ** 2)), 1e-6))

    model = init.copy() if init is not None else MlpModel.initialized(hyper.seed)
    model.in_shift, model.in_scale, model.out_scale = shift, scale, out_scale
    X = (H - shift) / scale
    Y = Yc / out_scale
    Xtr, Ytr, Xva, Yva = X[tr], Y[tr], X[val], Y[val]

    rng = np.random.Generator(np.random.Philox(key=hyper.seed))
    m = np.zeros_like(model.params)
    v = np.zeros_like(model.params)
    step = 0
    res = TrainResult(model=model)
    n = len(Xtr)
    best, best_params, best_epoch = math.inf, model.params.copy(), -1
    for _ in range(hyper.epochs):
        order = rng.permutation(n)
        for i in range(0, n, hyper.batch):
            idx = order[i:i + hyper.batch]
            _, g = model.loss_and_grad(Xtr[idx], Ytr[idx])
            step += 1
            m = hyper.beta1 * m + (1.0 - hyper.beta1) * g
            v = hyper.beta2 * v + (1.0 - hyper.beta2) * g * g
            mh = m / (1.0 - hyper.beta1 ** step)
            vh = v / (1.0 - hyper.beta2 ** step)
            model.params -= hyper.lr * mh / (np.sqrt(vh) + hyper.eps)
        res.train_loss.append(_phys_mse(model, Xtr, Ytr))
        res.val_loss.append(_phys_mse(model, Xva, Yva) if len(Xva) else float("nan"))
        score = res.val_loss[-1] if len(Xva) else res.train_loss[-1]
        if score < best:
            best, best_params = score, model.params.copy()
            best_epoch = len(res.train_loss) - 1
    # keep the epoch with the lowest validation loss
    model.params[:] = best_params
    model.meta = {"n_samples": int(len(ds)), "n_train": int(tr.sum()), "hyper": hyper.to_dict(),
                  "final_train_mse": res.train_loss[-1] if res.train_loss else None,
                  "final_val_mse": res.val_loss[-1] if res.val_loss else None,
                  "best_epoch": best_epoch,
                  "best_val_mse": res.val_loss[best_epoch] if best_epoch >= 0 else None}
    return res


def rmse(model: MlpModel, ds: Dataset) -> float:
    """RMSE of inertial-frame predictions over a dataset (zero leader heading)."""
    H, Yc = canonical_targets(ds.X9, ds.Y)
    err = model.forward(model.normalize(H)) * model.out_scale - Yc
    return float(np.sqrt(np.mean(np.sum(err * err, axis=1))))
