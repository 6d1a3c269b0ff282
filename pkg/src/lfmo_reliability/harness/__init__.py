"""Config-driven experiment harness."""

from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .experiments import (
    run_experiment,
    run_hypothesis_report,
    run_mean_study,
    run_mttf_table,
    run_pvalue_study,
    run_reliability_curve,
)
from .table import ResultTable
