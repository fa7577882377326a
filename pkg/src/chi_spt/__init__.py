"""Discrete-time singular perturbation toolkit for chi systems."""

__version__ = "0.1.0"
