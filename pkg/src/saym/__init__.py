"""Spectral-action Yang–Mills as a higher-derivative gauge theory: symbolic,
combinatorial and numerical checks."""

__version__ = "0.1.0"
