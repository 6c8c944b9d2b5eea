"""Minimal-ramification bounds and certified prime systems for nilpotent groups."""

__version__ = "0.1.0"
