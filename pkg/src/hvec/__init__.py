"""Simulation and analytics for Hadamard-sandwich virtual error correction."""

__version__ = "0.1.0"
