"""Scenario configuration, initial data, CLI and sweeps."""

from .config import ScenarioConfig, load, loads
from .initial import make_initial, resolve
from .scenario import run_scenario

__all__ = ["ScenarioConfig", "load", "loads", "make_initial", "resolve", "run_scenario"]
