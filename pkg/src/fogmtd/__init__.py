"""Simulator for load-balanced request handling and attacker isolation in a
fog layer in front of a cloud tier."""

from .core import (
    ConfigError,
    ContractViolation,
    IsolationUnavailable,
    ScenarioError,
    SimParams,
    SystemState,
    compute_f_cap,
    compute_score,
)
from .engine import Scenario, Tick, TickMetrics, WorkloadSpec, generate_workload, run, select_fog, tick
from .scenario_io import builtin_fixture, export_metrics, parse_scenario, render_scenario

__all__ = [
    "ConfigError", "ContractViolation", "IsolationUnavailable", "ScenarioError",
    "SimParams", "SystemState", "compute_f_cap", "compute_score",
    "Scenario", "Tick", "TickMetrics", "WorkloadSpec", "generate_workload", "run", "select_fog", "tick",
    "builtin_fixture", "export_metrics", "parse_scenario", "render_scenario",
]
