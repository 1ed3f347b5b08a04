"""Numerical laboratory for concentration of measure on classical compact Lie groups."""

__version__ = "0.1.0"
