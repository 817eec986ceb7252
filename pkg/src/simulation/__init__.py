"""Seeded simulation harness comparing the estimators."""

from .experiment import (
    RESULT_COLUMNS,
    SUMMARY_COLUMNS,
    ExperimentConfig,
    Method,
    ResultRow,
    ResultTable,
    SummaryRow,
    default_taxa,
    run_experiment,
    summarize,
    write_results_csv,
    write_summary_csv,
)
from .targets import (
    dirichlet_target,
    dirichlet_weights,
    log_gamma_variates,
    sample_trees,
    seed_stream,
)

__all__ = [
    "RESULT_COLUMNS",
    "SUMMARY_COLUMNS",
    "ExperimentConfig",
    "Method",
    "ResultRow",
    "ResultTable",
    "SummaryRow",
    "default_taxa",
    "dirichlet_target",
    "dirichlet_weights",
    "log_gamma_variates",
    "run_experiment",
    "sample_trees",
    "seed_stream",
    "summarize",
    "write_results_csv",
    "write_summary_csv",
]
