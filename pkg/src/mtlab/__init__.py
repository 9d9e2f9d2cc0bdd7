"""Numerical laboratory for Moser-Trudinger inequalities on unbounded domains and conformal discs."""

__version__ = "0.1.0"
