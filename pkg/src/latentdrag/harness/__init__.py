"""Experiment harness: grid execution, summaries, variance reporting."""

from .grid import (
    DEFAULT_LAYER_OPTIONS,
    DEFAULT_LEARNING_RATES,
    DEFAULT_N_PCA_OPTIONS,
    DEFAULT_SEEDS,
    GridRun,
    GridSpec,
    cell_dir_name,
    effective_n_pca,
    load_grid_runs,
    npca_label,
    run_grid,
)
from .gridconfig import load_grid_spec
from .scenario import CANONICAL_GENERATOR, DragScenario, canonical_scenario
from .summary import (
    CellSummary,
    format_summary_table,
    read_summaries_csv,
    summarize,
    write_summary_csv,
)
from .variance import VarianceRow, variance_report, write_variance_csv

__all__ = [
    "CANONICAL_GENERATOR",
    "CellSummary",
    "DEFAULT_LAYER_OPTIONS",
    "DEFAULT_LEARNING_RATES",
    "DEFAULT_N_PCA_OPTIONS",
    "DEFAULT_SEEDS",
    "DragScenario",
    "GridRun",
    "GridSpec",
    "VarianceRow",
    "canonical_scenario",
    "cell_dir_name",
    "effective_n_pca",
    "format_summary_table",
    "load_grid_runs",
    "load_grid_spec",
    "npca_label",
    "read_summaries_csv",
    "run_grid",
    "summarize",
    "variance_report",
    "write_summary_csv",
    "write_variance_csv",
]
