"""Lazy simulation and deviation-rate numerics for planar cone navigations."""

__version__ = "0.1.0"
