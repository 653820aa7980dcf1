"""FETI-DP for composite FE/DG discretizations of -div(alpha grad u) = f."""

from ._core import (
    CSV_HEADER,
    ConfigError,
    ExperimentConfig,
    Preset,
    SolverError,
    dense_eigenvalues,
    fit_slope,
    load_config,
    parse_mesh_list,
    run,
)

__all__ = [
    "CSV_HEADER",
    "ConfigError",
    "ExperimentConfig",
    "Preset",
    "SolverError",
    "dense_eigenvalues",
    "fit_slope",
    "load_config",
    "parse_mesh_list",
    "run",
]
