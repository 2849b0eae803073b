"""Temporal error-correlation analysis of random single-qubit Clifford circuits."""

__version__ = "0.1.0"
