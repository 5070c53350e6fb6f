"""Special functions, quadrature and the Cauchy integrator."""

from dirac_spectra.numerics.hermite import hermite_poly, phi, phi_batch, phi_derivative
from dirac_spectra.numerics.quadrature import cumulative_inner, integrate, tail_inner

__all__ = [
    "hermite_poly",
    "phi",
    "phi_batch",
    "phi_derivative",
    "integrate",
    "cumulative_inner",
    "tail_inner",
]
