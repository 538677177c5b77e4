"""Scenario runner, logging/replay, CLI, and the telemetry/command bridge."""

from .scenario import DiverPath, Scenario, ScenarioEvent, load_scenario
from .runner import RunSummary, run_scenario

__all__ = ["DiverPath", "RunSummary", "Scenario", "ScenarioEvent", "load_scenario", "run_scenario"]
