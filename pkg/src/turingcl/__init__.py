"""Turing bifurcations with conservation laws: spectral data, amplitude
coefficients, singular stability matrices, amplitude simulation and
full-PDE Bloch checks."""

__version__ = "0.1.0"
