"""Deterministic 5G NR slicing and RACH simulator for a logistics distribution center."""

__version__ = "0.1.0"
