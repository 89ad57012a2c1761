"""Invariant differential operators on the Siegel-Jacobi space."""

__version__ = "0.1.0"
