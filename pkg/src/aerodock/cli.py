"""Command-line entry point.

Every command prints a JSON object on stdout when it succeeds. Failures
print ``{"error": {"type": ..., "message": ...}}`` on stderr and exit
with a nonzero status:

==  =========================================
2   bad command line
3   invalid configuration or parameter
4   file could not be read or written
5   incompatible model file
6   simulation became non-finite
7   ``check`` found a failing property
1   anything else
==  =========================================
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__, kernels
from .dynamics import InvalidParameterError, SimulationFault
from .learning.network import ModelFormatError, MlpModel

log = logging.getLogger("aerodock")

EXIT_USAGE, EXIT_CONFIG, EXIT_IO, EXIT_MODEL, EXIT_SIM, EXIT_CHECK = 2, 3, 4, 5, 6, 7


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _config_args(p):
    p.add_argument("--config", help="scenario JSON file (defaults when omitted)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key; dotted keys reach nested objects")
    p.add_argument("--seed", type=int, help="override the config seed")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aerodock", description="Two-multirotor docking simulator.")
    parser.add_argument("--version", action="version", version=f"aerodock {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("collect", help="fly the curriculum and write the labelled dataset")
    _config_args(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--stage-duration", type=float, default=60.0, help="seconds per stage")
    p.add_argument("--epochs", type=int, help="training epochs between stages")

    p = sub.add_parser("train", help="train a model on a collected dataset")
    p.add_argument("--data", required=True, help="dataset directory or CSV file")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int)

    p = sub.add_parser("run", help="run one scenario")
    _config_args(p)
    p.add_argument("--model", help="trained model file")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("exp", help="run an experiment sweep")
    p.add_argument("kind", choices=("static", "hover", "moving"))
    _config_args(p)
    p.add_argument("--model", help="trained model file")
    p.add_argument("--runs", type=int, default=10, help="runs per condition (static: one per offset)")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.add_argument("--out", required=True, help="output directory")

    sub.add_parser("check", help="run the equivariance, Riccati and gradient property suites")
    return parser


# -- helpers ------------------------------------------------------------------

def _load_config(args, model_given: bool):
    from .sim.config import load_config, parse_override
    overrides = dict(parse_override(s) for s in args.overrides)
    if args.seed is not None:
        overrides["seed"] = args.seed
    raw = {}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, ValueError):
            raw = {}  # load_config reports the problem
    if "compensation" not in overrides and "compensation" not in raw:
        overrides["compensation"] = "model" if model_given else "none"
    return load_config(args.config, overrides)


def _model(path):
    return MlpModel.load(path) if path else None


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# -- commands -----------------------------------------------------------------

def cmd_collect(args) -> dict:
    from .learning.curriculum import run_curriculum
    from .learning.io import write_dataset
    from .learning.training import TrainHyper
    from .sim.collect import SimEnv
    from .sim.outputs import write_json

    cfg = _load_config(args, model_given=False)
    env = SimEnv(cfg=cfg.replace(mission="formation", compensation="none"),
                 stage_duration=args.stage_duration)
    hyper = TrainHyper(seed=cfg.seed) if args.epochs is None else TrainHyper(seed=cfg.seed, epochs=args.epochs)
    out = Path(args.out)
    res = run_curriculum(env, hyper=hyper)
    data_path = write_dataset(res.dataset, out)
    res.model.save(out / "model.bin")
    for k, m in enumerate(res.stage_models):
        m.save(out / f"stage_{k}.bin")
    info = {"dataset": str(data_path), "model": str(out / "model.bin"),
            "samples": len(res.dataset), "duration_s": res.duration,
            "stage_samples": [len(d) for d in res.stage_datasets], "seed": cfg.seed}
    write_json(info, out / "collect.json")
    return info


def cmd_train(args) -> dict:
    from .learning.io import read_dataset
    from .learning.training import TrainHyper, train

    ds = read_dataset(args.data)
    hyper = TrainHyper(seed=args.seed) if args.epochs is None else TrainHyper(seed=args.seed, epochs=args.epochs)
    res = train(ds, hyper)
    out = Path(args.out)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        res.model.save(out)
    except OSError as exc:
        raise OSError(f"{out}: {exc.strerror}") from exc
    return {"model": str(out), "samples": len(ds), "seed": args.seed,
            "best_val_mse": res.model.meta.get("best_val_mse"),
            "final_train_mse": res.model.meta.get("final_train_mse")}


def cmd_run(args) -> dict:
    from .sim.engine import run_scenario
    from .sim.outputs import summary_payload, write_outputs

    model_path = args.model
    cfg = _load_config(args, model_given=bool(model_path))
    model_path = model_path or cfg.model_path
    model = _model(model_path) if cfg.compensation in ("model", "model_observer") else None
    log_, summary = run_scenario(cfg, model)
    paths = write_outputs(log_, summary, args.out)
    return {**summary_payload(summary), "outputs": {k: str(v) for k, v in paths.items()}}


def cmd_exp(args) -> dict:
    from .sim import experiments as ex
    from .sim.outputs import table_rows, write_json, write_table_csv

    if args.runs < 1:
        raise InvalidParameterError("--runs must be at least 1")
    cfg = _load_config(args, model_given=bool(args.model))
    model = _model(args.model or cfg.model_path)
    out = Path(args.out)

    if args.kind == "static":
        if model is None:
            raise InvalidParameterError("the static study compares with and without a model; pass --model")
        res = ex.exp_static_offsets(ex.STATIC_OFFSETS, cfg, model, args.workers, out / "runs")
        rows = table_rows(res)
        write_table_csv(rows, out / "table.csv")
        payload = {"experiment": "static", "offsets": list(ex.STATIC_OFFSETS),
                   "rows": [dict(zip(("offset", "without", "with"), (o, wo.to_dict(), wi.to_dict())))
                            for o, wo, wi in res],
                   "docks_with": sum(wi.result == "Dock" for _, _, wi in res),
                   "docks_without": sum(wo.result == "Dock" for _, wo, _ in res)}
    elif args.kind == "hover":
        payload = {"experiment": "hover", "runs": args.runs}
        conditions = [("without", "none")] + ([("with", "model")] if model is not None else [])
        for tag, comp in conditions:
            r = ex.exp_hover_docking(args.runs, cfg.replace(compensation=comp), model,
                                     args.workers, out / "runs" / tag)
            payload[tag] = r.to_dict()
    else:
        r = ex.exp_moving_leader(cfg, model, args.runs, workers=args.workers, out_dir=out / "runs")
        modes = list(r.curves)
        path = out / "curves.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t"] + [f"err_down_{m}" for m in modes] + [f"err_3d_{m}" for m in modes])
            for row in r.table():
                w.writerow([repr(float(x)) for x in row])
        payload = {"experiment": "moving", "runs": args.runs, **r.to_dict()}
    write_json(payload, out / "summary.json")
    return payload


def cmd_check(args) -> dict:
    from .checks import run_all
    results = [r.to_dict() for r in run_all()]
    payload = {"backend": kernels.BACKEND, "checks": results,
               "passed": all(r["passed"] for r in results)}
    if not payload["passed"]:
        _emit(payload)
        raise CheckFailed("one or more property checks failed")
    return payload


COMMANDS = {"collect": cmd_collect, "train": cmd_train, "run": cmd_run, "exp": cmd_exp,
            "check": cmd_check}


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": {"type": kind, "message": message}}, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s", stream=sys.stderr)
    t0 = time.perf_counter()
    try:
        payload = COMMANDS[args.command](args)
    except ModelFormatError as exc:
        return _fail("model_format", str(exc), EXIT_MODEL)
    except InvalidParameterError as exc:
        return _fail("invalid_parameter", str(exc), EXIT_CONFIG)
    except SimulationFault as exc:
        return _fail("simulation_fault", str(exc), EXIT_SIM)
    except CheckFailed as exc:
        return _fail("check_failed", str(exc), EXIT_CHECK)
    except (OSError, ValueError) as exc:
        kind = "io" if isinstance(exc, OSError) else "invalid_input"
        return _fail(kind, str(exc), EXIT_IO if isinstance(exc, OSError) else EXIT_CONFIG)
    except Exception as exc:  # noqa: BLE001
        log.exception("unexpected failure")
        return _fail(type(exc).__name__, str(exc), 1)
    log.info("%s finished in %.1f s", args.command, time.perf_counter() - t0)
    _emit(payload)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
