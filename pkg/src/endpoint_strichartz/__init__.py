"""Spectral propagation and endpoint Strichartz measurements for the 2D
Schroedinger equation with an inverse-square potential."""

__version__ = "0.1.0"
