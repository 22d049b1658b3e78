#!/usr/bin/env python3
"""
Basic Usage Example - VSK Kriging

This example reconstructs a function with a jump from six equispaced
samples, once with a stationary Matérn kernel and once with a variably
scaled kernel whose scaling map is the indicator of the right half.
"""

import numpy as np

from ..analysis import compute_metrics
from ..designs import DesignSpec, evaluation_grid, generate
from ..gp import CovarianceModel, TrainingSet, power_function, predict_point, train
from ..kernels import RadialFamily, StationaryKernel, VskKernel
from ..scaling_maps import JumpIndicator, JumpTarget


def jump_reconstruction_example():
    """Stationary vs VSK reconstruction with fixed hyperparameters"""
    print("=== Jump Reconstruction Example ===\n")

    target = JumpTarget()
    X = generate(DesignSpec("equispaced", 6, target.domain))
    data = TrainingSet(X, target(X), target.domain)
    grid = evaluation_grid(target.domain, 500)

    base = StationaryKernel(RadialFamily("maternc2"), lengthscale=1.0)
    models = {
        "standard": CovarianceModel(base, sigma_f=8.0),
        "vsk": CovarianceModel(
            VskKernel(base, JumpIndicator(threshold=(0.5,))), sigma_f=8.0
        ),
    }

    print(f"Nodes: {np.round(X[:, 0], 3).tolist()}")
    print()
    print(f"{'model':<10}{'rmse':>10}{'max err':>10}{'max std':>10}")
    print("-" * 40)
    results = {}
    for label, model in models.items():
        gp = train(model, data)
        metrics = compute_metrics(gp, target, grid)
        results[label] = metrics
        print(
            f"{label:<10}{metrics.rmse:>10.5f}"
            f"{metrics.mae:>10.4f}{metrics.max_std:>10.5f}"
        )

    return results


def prediction_at_jump_example():
    """Posterior mean, interval and power function next to the jump"""
    print("\n=== Prediction Next To The Jump ===\n")

    target = JumpTarget()
    X = generate(DesignSpec("equispaced", 6, target.domain))
    data = TrainingSet(X, target(X), target.domain)
    base = StationaryKernel(RadialFamily("maternc2"), lengthscale=1.0)
    vsk = VskKernel(base, JumpIndicator(threshold=(0.5,)))

    for label, kernel in (("standard", base), ("vsk", vsk)):
        gp = train(CovarianceModel(kernel, sigma_f=8.0), data)
        for x in (0.45, 0.55):
            prediction = predict_point(gp, [x])
            print(f"  {label:<9} x={x:.2f}: mean={prediction.mean:+.4f} "
                  f"95% interval=[{prediction.lower:+.3f}, {prediction.upper:+.3f}] "
                  f"power={power_function(gp, [x]):.4f}")


if __name__ == "__main__":
    # Run all examples
    jump_reconstruction_example()
    prediction_at_jump_example()

    print("\n" + "=" * 50)
    print("Examples complete!")
    print("Next steps:")
    print("1. Try running: python run.py run jump_fixed")
    print("2. Compare the MLE runs: python run.py run jump_mle --sweep tables")
    print("3. See README.md for full documentation")
