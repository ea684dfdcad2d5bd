"""Meromorphic quasi-modular forms for SL2(Z) and their regularized L-functions."""

__version__ = "0.1.0"
