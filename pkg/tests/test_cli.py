import csv
import json
import subprocess
import sys

import pytest

from aerodock.cli import main
from aerodock.learning.network import MlpModel


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), (json.loads(err) if err.strip() else None)


@pytest.fixture
def model_file(tmp_path, small_model):
    p = tmp_path / "model.bin"
    small_model.save(p)
    return p


def test_check(capsys):
    code, out, _ = run(capsys, "check")
    assert code == 0 and out["passed"]
    assert {c["name"] for c in out["checks"]} == {"equivariance", "care", "gradients"}


def test_run_writes_outputs(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"duration": 2.0}))
    code, out, _ = run(capsys, "run", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert code == 0 and out["result"] == "Miss"
    with open(tmp_path / "o" / "log.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "t" and len(rows) == 102
    assert json.loads((tmp_path / "o" / "summary.json").read_text())["result"] == "Miss"


def test_run_flags_override_config(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"duration": 2.0, "seed": 1}))
    code, out, _ = run(capsys, "run", "--config", str(cfg), "--seed", "7", "--set", "duration=1.0",
                       "--out", str(tmp_path / "o"))
    assert code == 0 and out["seed"] == 7
    assert len((tmp_path / "o" / "log.csv").read_text().splitlines()) == 52


def test_run_with_model(capsys, tmp_path, model_file):
    code, out, _ = run(capsys, "run", "--model", str(model_file), "--set", "duration=1.0",
                       "--out", str(tmp_path / "o"))
    assert code == 0 and out["f_pred"] is not None


@pytest.mark.parametrize("argv,code,kind", [
    (["bogus"], 2, "usage"),
    (["run"], 2, "usage"),
    (["run", "--set", "nope=1", "--out", "x"], 3, "invalid_parameter"),
    (["run", "--set", "mass_bravo=-1", "--out", "x"], 3, "invalid_parameter"),
    (["run", "--config", "/nonexistent/c.json", "--out", "x"], 4, "io"),
    (["run", "--model", "/nonexistent/m.bin", "--out", "x"], 4, "io"),
    (["exp", "static", "--out", "x"], 3, "invalid_parameter"),
    (["exp", "hover", "--runs", "0", "--out", "x"], 3, "invalid_parameter"),
    (["train", "--data", "/nonexistent", "--out", "m.bin"], 4, "io"),
])
def test_errors(capsys, tmp_path, monkeypatch, argv, code, kind):
    monkeypatch.chdir(tmp_path)
    got, out, err = run(capsys, *argv)
    assert got == code and out is None
    assert err["error"]["type"] == kind and err["error"]["message"]


def test_model_version_mismatch(capsys, tmp_path, model_file):
    from test_learning import _patch_header
    _patch_header(model_file, "version", 99)
    code, _, err = run(capsys, "run", "--model", str(model_file), "--out", str(tmp_path / "o"))
    assert code == 5 and err["error"]["type"] == "model_format"


def test_collect_train_exp_pipeline(capsys, tmp_path):
    d = tmp_path / "data"
    code, out, _ = run(capsys, "collect", "--out", str(d), "--stage-duration", "8", "--epochs", "2")
    assert code == 0 and out["duration_s"] == pytest.approx(40.0, abs=0.5)
    assert (d / "dataset.csv").exists() and (d / "stage_4.bin").exists()

    m = tmp_path / "m.bin"
    code, out, _ = run(capsys, "train", "--data", str(d), "--out", str(m), "--seed", "3", "--epochs", "2")
    assert code == 0 and MlpModel.load(m).meta["hyper"]["seed"] == 3

    code, out, _ = run(capsys, "exp", "static", "--model", str(m), "--out", str(tmp_path / "s"))
    assert code == 0
    rows = (tmp_path / "s" / "table.csv").read_text().splitlines()
    assert len(rows) == 7

    code, out, _ = run(capsys, "exp", "hover", "--model", str(m), "--runs", "2", "--out", str(tmp_path / "h"))
    assert code == 0 and out["with"]["runs"] == 2 and out["without"]["runs"] == 2
    assert (tmp_path / "h" / "runs" / "with" / "run_001" / "log.csv").exists()

    code, out, _ = run(capsys, "exp", "moving", "--model", str(m), "--runs", "1", "--out", str(tmp_path / "mv"))
    assert code == 0 and set(out["entry_alt_err"]) == {"none", "model", "observer"}
    header = (tmp_path / "mv" / "curves.csv").read_text().splitlines()[0]
    assert header.startswith("t,err_down_none")


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "aerodock", "run", "--set", "duration=0.5",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"] == "Miss"
    proc = subprocess.run([sys.executable, "-m", "aerodock", "frobnicate"], capture_output=True, text=True)
    assert proc.returncode == 2 and json.loads(proc.stderr)["error"]["type"] == "usage"
