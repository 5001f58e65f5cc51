"""Arithmetic invariants of number fields and elliptic curves over Q."""

__version__ = "0.1.0"
