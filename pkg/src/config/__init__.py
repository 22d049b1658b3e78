"""
Configuration package for the VSK Kriging toolkit.

Contains numeric defaults (jitter ladder, MLE settings, evaluation grids),
output directories and the experiment presets. The text grammar for kernel
and scaling-map specs lives in ``src.config.specs`` and is imported from
there directly.
"""

from .settings import (
    # Directory paths
    PROJECT_ROOT,
    DATA_DIR,
    OUTPUT_DIR,

    # Output files
    CSV_FLOAT_FORMAT,
    CSV_LINE_TERMINATOR,
    MANIFEST_FILE,

    # Numerical safeguards
    JITTER_START,
    JITTER_MAX,
    JITTER_GROWTH,
    DISTINCT_TOLERANCE,
    FD_RELATIVE_STEP,

    # Evaluation grids
    EVAL_POINTS_1D,
    EVAL_GRID_2D,

    # Maximum likelihood
    MLE_DEFAULT_STARTS,
    MLE_MAX_ITERATIONS,
    MLE_SIMPLEX_TOLERANCE,
    MLE_FAILED_OBJECTIVE,
    LENGTHSCALE_BOUNDS,
    SIGMA_F_BOUNDS,
    SIGMA_N_BOUNDS,

    # Order studies
    ORDER_FIT_FLOOR,
    ORDER_FIT_MIN_POINTS,
    DEFAULT_STEP_EXPONENTS,

    DEFAULT_ALPHA,
    DEFAULT_PATH_COUNT,

    # Experiment presets
    EXPERIMENT_PRESETS,
    SWEEP_PRESETS,
    get_experiment_preset,
    get_sweep_preset,
)

__all__ = [
    "PROJECT_ROOT",
    "DATA_DIR",
    "OUTPUT_DIR",
    "CSV_FLOAT_FORMAT",
    "CSV_LINE_TERMINATOR",
    "MANIFEST_FILE",
    "JITTER_START",
    "JITTER_MAX",
    "JITTER_GROWTH",
    "DISTINCT_TOLERANCE",
    "FD_RELATIVE_STEP",
    "EVAL_POINTS_1D",
    "EVAL_GRID_2D",
    "MLE_DEFAULT_STARTS",
    "MLE_MAX_ITERATIONS",
    "MLE_SIMPLEX_TOLERANCE",
    "MLE_FAILED_OBJECTIVE",
    "LENGTHSCALE_BOUNDS",
    "SIGMA_F_BOUNDS",
    "SIGMA_N_BOUNDS",
    "ORDER_FIT_FLOOR",
    "ORDER_FIT_MIN_POINTS",
    "DEFAULT_STEP_EXPONENTS",
    "DEFAULT_ALPHA",
    "DEFAULT_PATH_COUNT",
    "EXPERIMENT_PRESETS",
    "SWEEP_PRESETS",
    "get_experiment_preset",
    "get_sweep_preset",
]
