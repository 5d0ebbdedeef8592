"""Numerical workbench for geodesics and curvature energies on surfaces of revolution."""

__version__ = "0.1.0"
