"""Scenario engine, experiments and output writers."""
from .config import ScenarioConfig, load_config
from .engine import RunSummary, SimLog, run_scenario

__all__ = ["ScenarioConfig", "load_config", "RunSummary", "SimLog", "run_scenario"]
