"""Bakry-Emery curvature and heat flows on weighted graphs."""

__version__ = "0.1.0"
