"""Staged data collection: each band is flown with the previous band's model."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..dynamics import InvalidParameterError
from .network import MlpModel
from .training import Dataset, TrainHyper, train

DEFAULT_STAGES = ((1.8, 1.5), (1.5, 1.2), (1.2, 0.9), (0.9, 0.6), (0.6, 0.5))


@dataclass
class CurriculumResult:
    model: MlpModel
    stage_models: list = field(default_factory=list)
    dataset: Dataset = field(default_factory=Dataset.empty)
    stage_datasets: list = field(default_factory=list)
    duration: float = 0.0


def run_curriculum(sim_env, stages=DEFAULT_STAGES, hyper: TrainHyper = TrainHyper(),
                   stage_duration: float | None = None, warm_start: bool = True) -> CurriculumResult:
    """Fly each band, append its samples and retrain on everything so far.

    ``sim_env`` needs ``collect_stage(stage, band, model, duration)``
    returning a :class:`Dataset` and a ``cfg.dt_control`` attribute.
    """
    stages = [tuple(float(x) for x in s) for s in stages]
    if not stages:
        raise InvalidParameterError("curriculum needs at least one stage")
    tops = [max(s) for s in stages]
    if any(b >= a for a, b in zip(tops, tops[1:])):
        raise InvalidParameterError("stages must be ordered by decreasing separation")
    data = Dataset.empty()
    model = None
    res = CurriculumResult(model=None)
    for k, band in enumerate(stages):
        ds = sim_env.collect_stage(k, band, model, stage_duration)
        res.stage_datasets.append(ds)
        data = data.concat(ds)
        model = train(data, hyper, init=model if warm_start else None).model
        model.meta["stage"] = k
        res.stage_models.append(model)
    res.model = model
    res.dataset = data
    res.duration = len(data) * sim_env.cfg.dt_control
    return res
