"""Exact arithmetic over F_q((1/T)) for singular systems of linear forms."""

__version__ = "0.1.0"
