"""Exact genus-zero (Log)topological recursion, WKB wavefunctions, formal
Laplace duality and quantum-curve verification on rational spectral curves."""

__version__ = "0.1.0"
