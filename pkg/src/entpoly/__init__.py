"""Entanglement polytopes, local filters and Haar Monte Carlo statistics for few-qubit states."""

__version__ = "0.1.0"
