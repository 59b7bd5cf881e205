"""Stabilizer-code toolkit for light-cone, correctability and uncertainty experiments."""

__version__ = "0.1.0"
