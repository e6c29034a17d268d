"""Discrete-time flatness maps and output-only predictive control for multirotors."""

__version__ = "0.1.0"
