"""Simulation and verification toolkit for exponential relaxation oscillators."""
__version__ = "0.1.0"
