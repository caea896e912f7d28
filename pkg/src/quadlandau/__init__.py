"""Landau singularities of quadratic integrals and Feynman graphs."""

__version__ = "0.1.0"
