"""Uncertainty relations for tuples of observables, with numerical verification."""

__version__ = "0.1.0"
