# Configuration settings for the VSK Kriging toolkit

import copy
from pathlib import Path
from typing import Dict, List, Tuple, TypedDict

# Directory paths
# Go up from src/config/settings.py to project root
PROJECT_ROOT = Path(__file__).parent.parent.parent
BASE_DIR = PROJECT_ROOT
DATA_DIR = BASE_DIR / "data"
OUTPUT_DIR = DATA_DIR / "output"

# Output file settings
CSV_FLOAT_FORMAT = "%.17g"  # 17 significant digits round-trips a float64
CSV_LINE_TERMINATOR = "\n"
MANIFEST_FILE = "manifest.json"

# Factorization jitter ladder (relative to mean of the diagonal)
JITTER_START = 1e-12
JITTER_MAX = 1e-6
JITTER_GROWTH = 10.0

# Training data
DISTINCT_TOLERANCE = 1e-12  # infinity-norm tolerance for pairwise distinct nodes

# Finite differences for scaling-map gradients
FD_RELATIVE_STEP = 1e-6

# Evaluation grids
EVAL_POINTS_1D = 500
EVAL_GRID_2D = 50

# Maximum likelihood defaults
MLE_DEFAULT_STARTS = 8
MLE_MAX_ITERATIONS = 500
MLE_SIMPLEX_TOLERANCE = 1e-8
MLE_FAILED_OBJECTIVE = 1e25  # objective value reported when factorization fails
LENGTHSCALE_BOUNDS = (1e-3, 10.0)  # times the domain diameter
SIGMA_F_BOUNDS = (1e-3, 1e3)  # times std(y)
SIGMA_N_BOUNDS = (1e-6, 1.0)  # times std(y)
SIGMA_N_NOISE_BOUNDS = (1e-2, 1.0)  # times the known noise std

# Order-of-convergence studies
ORDER_FIT_FLOOR = 1e-13  # residuals below this are round-off
ORDER_FIT_MIN_POINTS = 4
DEFAULT_STEP_EXPONENTS = tuple(range(3, 13))  # h_j = 2**-j

# Confidence level
DEFAULT_ALPHA = 0.05

# Sample paths
DEFAULT_PATH_COUNT = 5
PATH_VARIANCE_FLOOR = 1e-10  # times sigma_f**2; paths collapse onto the mean below it
PATH_NEGATIVE_EIGENVALUE = 1e-8  # tolerated relative to the largest eigenvalue


# Experiment presets
class KernelPreset(TypedDict):
    family: str
    lengthscale: float
    sigma_f: float
    sigma_n: float


class ExperimentPreset(TypedDict):
    design: str
    n: int
    domain: List[Tuple[float, float]]
    kernel: KernelPreset
    psi: str
    target: str
    noise_std: float
    fit: bool
    fixed: Dict[str, float]
    sweep: List[int]
    eval_points: int


# Node-count sweeps
JUMP_SWEEP_FORMULA = [10 + 20 * j for j in range(1, 40)]
JUMP_SWEEP_TABLES = [27, 81]
CORNER_SWEEP_FORMULA = [11 + 20 * j for j in range(1, 40)]
CORNER_SWEEP_SPOTLIGHT = [20, 21]
WEIERSTRASS_SWEEP = list(range(0, 13))

SWEEP_PRESETS: Dict[str, Dict[str, List[int]]] = {
    "jump_mle": {"formula": JUMP_SWEEP_FORMULA, "tables": JUMP_SWEEP_TABLES},
    "corner": {"formula": CORNER_SWEEP_FORMULA, "spotlight": CORNER_SWEEP_SPOTLIGHT},
    "weierstrass": {"full": WEIERSTRASS_SWEEP},
}

EXPERIMENT_PRESETS: Dict[str, ExperimentPreset] = {
    "jump_fixed": {
        "design": "equispaced",
        "n": 6,
        "domain": [(0.0, 1.0)],
        "kernel": {
            "family": "maternc2",
            "lengthscale": 1.0,
            "sigma_f": 8.0,
            "sigma_n": 0.0,
        },
        "psi": "jump(0.5)",
        "target": "jump",
        "noise_std": 0.0,
        "fit": False,
        "fixed": {},
        "sweep": [6],
        "eval_points": EVAL_POINTS_1D,
    },
    "jump_mle": {
        "design": "halton",
        "n": 27,
        "domain": [(0.0, 1.0)],
        "kernel": {
            "family": "maternc4",
            "lengthscale": 0.1,
            "sigma_f": 1.0,
            "sigma_n": 0.25,
        },
        "psi": "jump(0.5)",
        "target": "jump",
        "noise_std": 0.25,
        "fit": True,
        "fixed": {},
        "sweep": JUMP_SWEEP_TABLES,
        "eval_points": EVAL_POINTS_1D,
    },
    "weierstrass": {
        "design": "grid",
        "n": 5,  # per axis
        "domain": [(0.0, 1.0), (0.0, 1.0)],
        "kernel": {
            "family": "maternc0",
            "lengthscale": 0.5,
            "sigma_f": 1.0,
            "sigma_n": 1e-3,
        },
        "psi": "weierstrass(0.5,3,12)",
        "target": "weierstrass",
        "noise_std": 0.0,
        "fit": True,
        "fixed": {},
        "sweep": WEIERSTRASS_SWEEP,
        "eval_points": EVAL_GRID_2D,
    },
    "corner": {
        "design": "equispaced",
        "n": 21,
        "domain": [(0.0, 1.0)],
        "kernel": {
            "family": "gaussian",
            "lengthscale": 0.2,
            "sigma_f": 1.0,
            "sigma_n": 1e-3,
        },
        "psi": "corner(0.5,0.5)",
        "target": "corner",
        "noise_std": 0.0,
        "fit": True,
        "fixed": {},
        "sweep": CORNER_SWEEP_SPOTLIGHT,
        "eval_points": EVAL_POINTS_1D,
    },
    "gibbs_compare": {
        "design": "chebyshev",
        "n": 9,
        "domain": [(-1.0, 1.0)],
        "kernel": {
            "family": "gaussian",
            "lengthscale": 0.5,
            "sigma_f": 1.0,
            "sigma_n": 0.05,
        },
        "psi": "target",
        "target": "expcos",
        "noise_std": 0.05,
        "fit": True,
        "fixed": {},
        "sweep": [9],
        "eval_points": EVAL_POINTS_1D,
    },
}


def get_experiment_preset(experiment_id: str) -> ExperimentPreset:
    """
    Get the default configuration of an experiment.

    Returns:
        dict: Preset for ``experiment_id`` (copy to prevent modification)

    Raises:
        KeyError: If the experiment is unknown
    """
    if experiment_id not in EXPERIMENT_PRESETS:
        raise KeyError(f"Experiment '{experiment_id}' not found. "
                       f"Available experiments: {list(EXPERIMENT_PRESETS.keys())}")
    return copy.deepcopy(EXPERIMENT_PRESETS[experiment_id])


def get_sweep_preset(experiment_id: str, name: str) -> List[int]:
    """Get a named sweep list (e.g. ``formula`` or ``tables``) for an experiment."""
    presets = SWEEP_PRESETS.get(experiment_id, {})
    if name not in presets:
        raise KeyError(f"Sweep preset '{name}' not found for '{experiment_id}'. "
                       f"Available presets: {list(presets.keys())}")
    return list(presets[name])
