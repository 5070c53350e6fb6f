"""Tests for dirac-spectra."""
