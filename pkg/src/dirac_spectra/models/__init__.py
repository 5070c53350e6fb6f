"""Data types for dirac-spectra."""

from dirac_spectra.models.grid import CumulativeIntegral, Grid, VectorTrajectory
from dirac_spectra.models.plan import Addition, PerturbationPlan
from dirac_spectra.models.report import CheckResult, VerificationReport
from dirac_spectra.models.spectral import Boundary, CauchyProblem, PotentialField, SpectralPoint

__all__ = [
    "Grid",
    "VectorTrajectory",
    "CumulativeIntegral",
    "Boundary",
    "SpectralPoint",
    "PotentialField",
    "CauchyProblem",
    "Addition",
    "PerturbationPlan",
    "CheckResult",
    "VerificationReport",
]
