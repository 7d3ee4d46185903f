"""Reproducible experiment scenarios and their command-line front end."""
from .config import ExperimentConfig, SCENARIOS, load_config, parse_config_text
from .results import Check, ScenarioResult, SummaryRow, write_outputs
from .scenarios import (run, run_events, run_extremes, run_gamma_scaling, run_localise,
                        run_pmf_crosscheck, run_split_law)

__all__ = [
    "ExperimentConfig", "SCENARIOS", "load_config", "parse_config_text",
    "Check", "ScenarioResult", "SummaryRow", "write_outputs", "run",
    "run_localise", "run_split_law", "run_gamma_scaling", "run_events", "run_extremes",
    "run_pmf_crosscheck",
]
