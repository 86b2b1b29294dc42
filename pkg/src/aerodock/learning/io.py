"""Dataset CSV files: one row per sample."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .training import Dataset

COLUMNS = ("dp_n", "dp_e", "dp_d", "va_n", "va_e", "va_d", "vb_n", "vb_e", "vb_d",
           "f_n", "f_e", "f_d", "stage", "t")
DATASET_FILE = "dataset.csv"


def write_dataset(ds: Dataset, path) -> Path:
    path = Path(path)
    if path.is_dir() or path.suffix == "":
        path.mkdir(parents=True, exist_ok=True)
        path = path / DATASET_FILE
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for x, y, s, t in zip(ds.X9, ds.Y, ds.stage, ds.t):
            w.writerow([repr(float(v)) for v in x] + [repr(float(v)) for v in y]
                       + [int(s), repr(float(t))])
    return path


def read_dataset(path) -> Dataset:
    path = Path(path)
    if path.is_dir():
        path = path / DATASET_FILE
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror}") from exc
    if not rows or tuple(rows[0]) != COLUMNS:
        raise ValueError(f"{path}: unexpected dataset header")
    body = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, len(COLUMNS))
    return Dataset(X9=body[:, 0:9], Y=body[:, 9:12], stage=body[:, 12].astype(int), t=body[:, 13])
