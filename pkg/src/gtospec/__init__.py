"""Spectral analysis of generalized transfer operators of SDEs on flat tori."""

__version__ = "0.1.0"
