"""Eigenvalue flow of H + i t v v^* for Wigner H: trajectories, local law, outlier emergence."""

__version__ = "0.1.0"
