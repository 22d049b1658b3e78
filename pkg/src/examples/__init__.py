"""
Examples package for the VSK Kriging toolkit.

This package contains example scripts demonstrating how to use the
kernels, the Gaussian-process model and the diagnostics.

Available examples:
- basic_usage: Stationary vs VSK reconstruction of a jump
- diagnostics_example: Local-equivalence residuals and power-function bounds
"""

# Make examples easily accessible
from . import basic_usage, diagnostics_example

__all__ = ['basic_usage', 'diagnostics_example']
