"""Simulation and analysis toolkit for two bodies on the sphere with cotangent potential."""

__version__ = "0.1.0"
