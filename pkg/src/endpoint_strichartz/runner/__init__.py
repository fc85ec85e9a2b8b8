"""Configuration, experiment orchestration, run records and reports."""

from .config import EXPERIMENTS, ExperimentConfig, load_config, parse_config
from .core import fit_log2_slope, report, run, write_report
from .records import Check, RunRecord

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "run",
    "report",
    "write_report",
    "fit_log2_slope",
    "Check",
    "RunRecord",
]
