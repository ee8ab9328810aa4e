"""Khovanov homology of cables and Whitehead doubles, computed exactly."""

__version__ = "0.1.0"
