"""Hybrid Euler-Hadamard product for the Riemann zeta function."""

__version__ = "0.1.0"
