"""
Minimal pytest configuration and fixtures for the testing suite.
"""

import numpy as np
import pytest
from pathlib import Path

from src.designs import DesignSpec, generate
from src.gp import CovarianceModel, TrainingSet
from src.kernels import RadialFamily, StationaryKernel, VskKernel
from src.scaling_maps import JumpIndicator, JumpTarget


@pytest.fixture
def gaussian_kernel():
    """Unit-length Gaussian kernel."""
    return StationaryKernel(RadialFamily("gaussian"), lengthscale=1.0)


@pytest.fixture
def jump_map():
    """Indicator of [0.5, 1]."""
    return JumpIndicator(threshold=(0.5,))


@pytest.fixture
def equispaced_six():
    """Six equispaced nodes on [0, 1]."""
    return generate(DesignSpec("equispaced", 6, ((0.0, 1.0),)))


@pytest.fixture
def jump_training_set(equispaced_six):
    """Noise-free samples of the jump target at six equispaced nodes."""
    target = JumpTarget()
    return TrainingSet(equispaced_six, target(equispaced_six), target.domain)


@pytest.fixture
def jump_fixed_models(jump_map):
    """Stationary and VSK Matérn C2 models with ℓ=1, σ_f=8, σ_n=0."""
    base = StationaryKernel(RadialFamily("maternc2"), lengthscale=1.0)
    return {
        "standard": CovarianceModel(base, sigma_f=8.0, sigma_n=0.0),
        "vsk": CovarianceModel(VskKernel(base, jump_map), sigma_f=8.0, sigma_n=0.0),
    }


@pytest.fixture
def two_node_set():
    """Nodes {0, 1} with observations {1, 0}."""
    return TrainingSet(np.array([[0.0], [1.0]]), np.array([1.0, 0.0]))


@pytest.fixture
def output_dir(tmp_path: Path) -> Path:
    """Temporary directory for experiment artifacts."""
    path = tmp_path / "output"
    path.mkdir()
    return path
