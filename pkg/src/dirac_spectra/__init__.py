"""Dirac Spectra - spectral data of the Dirac operator with linear potential."""

__version__ = "0.1.0"
