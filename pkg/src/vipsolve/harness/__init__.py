"""Config loading, experiment execution and trace comparison for the ``vip`` CLI."""
from .config import ConfigError, ExperimentConfig, config_from_dict, load_config, save_config, validate_config
from .runner import (
    EXIT_BUDGET,
    EXIT_CONVERGED,
    EXIT_DIVERGED,
    EXIT_INVALID,
    EXIT_NOT_APPLICABLE,
    SummaryReport,
    compare_runs,
    format_table,
    read_trace,
    run_experiment,
)

__all__ = [
    "EXIT_BUDGET",
    "EXIT_CONVERGED",
    "EXIT_DIVERGED",
    "EXIT_INVALID",
    "EXIT_NOT_APPLICABLE",
    "ConfigError",
    "ExperimentConfig",
    "SummaryReport",
    "compare_runs",
    "config_from_dict",
    "format_table",
    "load_config",
    "read_trace",
    "run_experiment",
    "save_config",
    "validate_config",
]
