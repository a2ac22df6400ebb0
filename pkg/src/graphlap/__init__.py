"""Numerical laboratory for random graph Laplacians and their limits."""

__version__ = "0.1.0"
