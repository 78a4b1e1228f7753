"""Digit agreement between number-theoretic expansions and entropy quotients."""

__version__ = "0.1.0"
