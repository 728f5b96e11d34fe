"""Finite-size simulator for a cyclic-shift quantum amplifier and its classical pointer limit."""

__version__ = "0.1.0"
