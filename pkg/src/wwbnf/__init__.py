"""Quartic Birkhoff normal form of periodic deep-water gravity waves."""

__version__ = "0.1.0"
