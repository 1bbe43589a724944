"""Reservoir computing with a single autonomous Boolean XOR node and two delay lines."""

__version__ = "0.1.0"
