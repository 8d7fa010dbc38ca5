"""Experiment drivers, configuration and the command-line front-end."""

from .config import ExperimentConfig, default_config, from_mapping, load_config
from .experiments import (
    run_ber_sweep,
    run_diversity_scan,
    run_experiment,
    run_papr_ccdf,
    run_papr_table,
)
from .records import CSV_COLUMNS, ResultRecord, from_csv, render, to_csv, to_json, wilson_interval
from .verify import CheckResult, run_verify

__all__ = [
    "CSV_COLUMNS", "CheckResult", "ExperimentConfig", "ResultRecord", "default_config", "from_csv",
    "from_mapping", "load_config", "render", "run_ber_sweep", "run_diversity_scan", "run_experiment",
    "run_papr_ccdf", "run_papr_table", "run_verify", "to_csv", "to_json", "wilson_interval",
]
