"""Kernel interpolation, quasi-interpolation and Sobolev-norm convergence experiments."""

__version__ = "0.1.0"
