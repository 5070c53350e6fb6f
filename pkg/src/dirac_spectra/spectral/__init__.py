"""Model spectra, the Gel'fand-Levitan engine and verification."""
