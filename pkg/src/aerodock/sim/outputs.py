"""CSV/JSON writers for runs and sweeps.

Every float is written with ``repr`` so identical runs give identical bytes.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

from .engine import METRIC_WINDOW, RunSummary, SimLog

TABLE_COLUMNS = ("offset_m",
                 "without_err_down_m", "without_err_3d_m", "without_f_pred_mps2", "without_result",
                 "with_err_down_m", "with_err_3d_m", "with_f_pred_mps2", "with_result")
EVENT_COLUMNS = ("t", "type", "rel_n", "rel_e", "rel_d", "rel_vn", "rel_ve", "rel_vd")


def _fmt(x) -> str:
    if x is None:
        return "N/A"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _open(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", newline="")
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror}") from exc


def write_log_csv(log: SimLog, path) -> Path:
    path = Path(path)
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(log.columns)
        for row in log.rows:
            w.writerow([_fmt(float(x)) for x in row])
    return path


def write_events_csv(events, path) -> Path:
    path = Path(path)
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EVENT_COLUMNS)
        for e in events:
            w.writerow([_fmt(e.t), e.type, *(_fmt(x) for x in e.rel_pos), *(_fmt(x) for x in e.rel_vel)])
    return path


def write_json(obj, path) -> Path:
    path = Path(path)
    with _open(path) as fh:
        fh.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


def summary_payload(summary: RunSummary) -> dict:
    d = summary.to_dict()
    d["metric_note"] = (f"err_down, err_3d and f_pred are means over the {METRIC_WINDOW} s "
                        "window ending at the dock (or abort) time")
    return d


def write_outputs(log: SimLog, summary: RunSummary, out_dir) -> dict:
    """Write ``log.csv``, ``events.csv`` and ``summary.json`` into ``out_dir``."""
    out = Path(out_dir)
    return {"log": write_log_csv(log, out / "log.csv"),
            "events": write_events_csv(log.events, out / "events.csv"),
            "summary": write_json(summary_payload(summary), out / "summary.json")}


def table_rows(results) -> list[list]:
    """``results``: iterable of ``(offset, without, with)`` summaries."""
    rows = []
    for offset, wo, wi in results:
        rows.append([float(offset), wo.err_down, wo.err_3d, None, wo.result,
                     wi.err_down, wi.err_3d, wi.f_pred, wi.result])
    return rows


def write_table_csv(rows, path) -> Path:
    path = Path(path)
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE_COLUMNS)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
    return path
