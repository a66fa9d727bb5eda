"""Spectral laboratory for 3D Couette flow in a tilted magnetic field."""

__version__ = "0.1.0"
