"""Numerical checks of Kahler structures on tangent disk bundles of space forms."""

__version__ = "0.1.0"
