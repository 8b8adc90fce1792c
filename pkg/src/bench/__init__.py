"""Benchmark experiments, tables and artifact writers."""

from src.bench.convergence import convergence_study, observed_orders
from src.bench.experiment import (
    RESULT_COLUMNS,
    ExperimentConfig,
    ResultRow,
    run_experiment,
    solve_level,
)
from src.bench.problems import PRESETS, ProblemPreset, get_preset, problem_spec
from src.bench.suite import run_suite, suite_configs
from src.bench.tables import dof_count_closed_form, emit_dof_table, emit_patchsize_table

__all__ = [
    "PRESETS",
    "RESULT_COLUMNS",
    "ExperimentConfig",
    "ProblemPreset",
    "ResultRow",
    "convergence_study",
    "dof_count_closed_form",
    "emit_dof_table",
    "emit_patchsize_table",
    "get_preset",
    "observed_orders",
    "problem_spec",
    "run_experiment",
    "run_suite",
    "solve_level",
    "suite_configs",
]
