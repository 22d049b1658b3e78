"""
VSK Kriging - Source Package

Gaussian-process (Kriging) regression with variably scaled kernels, the
Gibbs and Paciorek non-stationary comparators, marginal-likelihood fitting
and the diagnostics and reconstruction experiments built on them.

Core modules:
- kernels: radial profiles, stationary / VSK / Gibbs / Paciorek kernels
- scaling_maps: scaling functions ψ and experiment target functions
- gp: training, posterior mean and variance, power function, sample paths
- mle: negative log marginal likelihood and multi-start fitting
- designs: node designs, evaluation grids and seeded noise
- analysis: metrics, power-function bounds and local-equivalence residuals
- experiments: experiment runners
- main: command-line interface (``vskgp``)
"""

__version__ = "0.1.0"

from .kernels import (
    RadialFamily,
    StationaryKernel,
    VskKernel,
    GibbsKernel,
    PaciorekKernel,
    LinearVskKernel,
    gram_matrix,
)

from .scaling_maps import (
    ZeroMap,
    JumpIndicator,
    CornerBump,
    WeierstrassPartial,
    TargetMimic,
    target_by_name,
    scaling_map_by_name,
)

from .gp import (
    CovarianceModel,
    TrainingSet,
    train,
    predict,
    power_function,
    sample_paths,
)

from .mle import nlml, fit, HyperBounds

from .experiments import ExperimentConfig, run_experiment

from .main import main

__all__ = [
    # Kernels
    "RadialFamily",
    "StationaryKernel",
    "VskKernel",
    "GibbsKernel",
    "PaciorekKernel",
    "LinearVskKernel",
    "gram_matrix",

    # Scaling maps and targets
    "ZeroMap",
    "JumpIndicator",
    "CornerBump",
    "WeierstrassPartial",
    "TargetMimic",
    "target_by_name",
    "scaling_map_by_name",

    # Gaussian process
    "CovarianceModel",
    "TrainingSet",
    "train",
    "predict",
    "power_function",
    "sample_paths",

    # Hyperparameter fitting
    "nlml",
    "fit",
    "HyperBounds",

    # Experiments
    "ExperimentConfig",
    "run_experiment",

    # Main entry point
    "main",

    # Version
    "__version__",
]
