"""Executable finite-scale toolkit for Fraïssé limits, invariant closure operators and rank functions."""

__version__ = "0.1.0"
