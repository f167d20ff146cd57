"""Uncertainty measures for exponential-family regression and an axiom harness."""

__version__ = "0.1.0"
