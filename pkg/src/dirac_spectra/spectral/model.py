"""Closed-form spectral data of the Dirac operator with linear potential.

On the whole axis the operator with p = 0, q = x has eigenvalues
sign(n) sqrt(2|n|) and eigenfunctions built from consecutive Hermite
functions. The half-axis operators with alpha = 0 and alpha = pi/2 keep the
even and the odd members of that family respectively.
"""

import logging
import math
from collections.abc import Sequence
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike

from dirac_spectra.errors import UnsortedSpectrumError
from dirac_spectra.models.grid import FloatArray, Grid, VectorTrajectory
from dirac_spectra.models.spectral import Boundary, BoundaryLike, SpectralPoint, as_model_boundary
from dirac_spectra.numerics.hermite import phi, phi_batch, phi_derivative_batch
from dirac_spectra.numerics.quadrature import DEFAULT_TOL, integrate, tail_upper

logger = logging.getLogger(__name__)


def _sign(n: int) -> int:
    return (n > 0) - (n < 0)


def whole_axis_eigenvalue(n: int) -> float:
    """lambda_n = sign(n) sqrt(2|n|)."""
    return _sign(n) * math.sqrt(2.0 * abs(n))


def _whole_axis_values(n: int, s: ArrayLike) -> FloatArray:
    points = np.atleast_1d(np.asarray(s, dtype=np.float64))
    order = abs(n)
    rows = phi_batch(order, points)
    first = np.zeros_like(points) if n == 0 else _sign(n) * rows[order - 1]
    return np.vstack((first, rows[order]))


def _whole_axis_derivatives(n: int, s: FloatArray) -> FloatArray:
    order = abs(n)
    rows = phi_derivative_batch(order, s)
    first = np.zeros_like(s) if n == 0 else _sign(n) * rows[order - 1]
    return np.vstack((first, rows[order]))


def whole_axis_eigenfunction(n: int, grid: Grid) -> VectorTrajectory:
    """U_n sampled on a grid.

    U_n = (phi_{n-1}, phi_n) for n > 0, (-phi_{|n|-1}, phi_{|n|}) for n < 0
    and (0, phi_0) for n = 0.
    """
    return VectorTrajectory.from_evaluator(grid, lambda s: _whole_axis_values(n, s))


def whole_axis_residual(n: int, x: ArrayLike) -> float:
    """Sup-norm of B U_n' + Omega_0 U_n - lambda_n U_n over the sample points.

    Derivatives come from the Hermite ladder relations.
    """
    points = np.atleast_1d(np.asarray(x, dtype=np.float64))
    u = _whole_axis_values(n, points)
    du = _whole_axis_derivatives(n, points)
    lam = whole_axis_eigenvalue(n)
    first = du[1] + points * u[1] - lam * u[0]
    second = -du[0] + points * u[0] - lam * u[1]
    return float(max(np.max(np.abs(first)), np.max(np.abs(second))))


def _phi_second(order: int, s: FloatArray) -> FloatArray:
    values = phi_batch(order, s)
    derivative = phi_derivative_batch(order, s)[order]
    second = -values[order] - s * derivative
    if order >= 1:
        second = second + math.sqrt(2.0 * order) * phi_derivative_batch(order - 1, s)[order - 1]
    return second


def oscillator_residual(n: int, x: ArrayLike) -> tuple[float, float]:
    """Residuals of the decoupled second-order equations satisfied by U_n.

    The components solve -y1'' + x^2 y1 = (lambda^2 - 1) y1 and
    -y2'' + x^2 y2 = (lambda^2 + 1) y2.

    Returns:
        Sup-norms of the two residuals over the sample points
    """
    points = np.atleast_1d(np.asarray(x, dtype=np.float64))
    u = _whole_axis_values(n, points)
    lam_squared = 2.0 * abs(n)
    order = abs(n)
    second2 = _phi_second(order, points)
    residual2 = -second2 + (points**2 - lam_squared - 1.0) * u[1]
    if n == 0:
        return 0.0, float(np.max(np.abs(residual2)))
    second1 = _sign(n) * _phi_second(order - 1, points)
    residual1 = -second1 + (points**2 - lam_squared + 1.0) * u[0]
    return float(np.max(np.abs(residual1))), float(np.max(np.abs(residual2)))


def whole_axis_index(k: int, bc: BoundaryLike) -> int:
    """Whole-axis index of the k-th half-axis eigenpair: 2k for alpha0, 2k+1 for pi/2."""
    return 2 * k if as_model_boundary(bc) is Boundary.ALPHA_0 else 2 * k + 1


def half_axis_eigenvalue(k: int, bc: BoundaryLike) -> float:
    """k-th eigenvalue of the half-axis model operator.

    Raises:
        UnsupportedBoundaryError: If bc is a general real alpha
    """
    return whole_axis_eigenvalue(whole_axis_index(k, bc))


def nearest_model_eigenvalue(mu: float, bc: BoundaryLike) -> float:
    """Model eigenvalue closest to mu."""
    bc = as_model_boundary(bc)
    # Eigenvalues are sign * sqrt(2m) with m of fixed parity
    parity = 0 if bc is Boundary.ALPHA_0 else 1
    centre = int(round(mu * mu / 2.0))
    candidates = [m for m in range(max(centre - 2, 0), centre + 3) if m % 2 == parity]
    sign = -1.0 if mu < 0 else 1.0
    values = [sign * math.sqrt(2.0 * m) for m in candidates]
    return min(values, key=lambda value: abs(value - mu))


def _boundary_scale(n: int, bc: Boundary) -> float:
    """Factor c with c U_n(0) = (sin alpha, -cos alpha)."""
    order = abs(n)
    if bc is Boundary.ALPHA_0:
        return -1.0 / float(phi(order, 0.0))
    return 1.0 / (_sign(n) * float(phi(order - 1, 0.0)))


def model_eigenfunction(k: int, bc: BoundaryLike, grid: Grid) -> VectorTrajectory:
    """Half-axis model eigenfunction normalized by its Cauchy data.

    For alpha0 this is V_k = -U_{2k} / phi_{2k}(0) with value (0, -1) at the
    origin; for alpha = pi/2 it is U_{2k+1} scaled to the value (1, 0).

    Raises:
        UnsupportedBoundaryError: If bc is a general real alpha
    """
    bc = as_model_boundary(bc)
    n = whole_axis_index(k, bc)
    scale = _boundary_scale(n, bc)
    return VectorTrajectory.from_evaluator(grid, lambda s: scale * _whole_axis_values(n, s))


def _closed_form_norming(k: int) -> float:
    if k == 0:
        return math.sqrt(math.pi) / 2.0
    n = abs(k)
    # 4^n (n!)^2 sqrt(pi) / (2n)!
    log_ratio = n * math.log(4.0) + 2.0 * math.lgamma(n + 1) - math.lgamma(2 * n + 1)
    return math.exp(log_ratio) * math.sqrt(math.pi)


@lru_cache(maxsize=256)
def _quadrature_norming(n: int, bc: Boundary, tol: float) -> float:
    scale = _boundary_scale(n, bc)
    upper = tail_upper(math.sqrt(2.0 * abs(n) + 1.0))

    def density(s: float) -> float:
        values = _whole_axis_values(n, s)
        return float(values[0, 0] ** 2 + values[1, 0] ** 2)

    unscaled = integrate(density, 0.0, upper, tol)
    logger.debug("Norming of U_%d (%s) by quadrature: %.15g", n, bc.value, unscaled)
    return scale * scale * unscaled


def norming_constant(k: int, bc: BoundaryLike, *, tol: float = DEFAULT_TOL) -> SpectralPoint:
    """Eigenvalue and norming constant of the k-th half-axis model eigenpair.

    alpha0 uses a_0 = sqrt(pi)/2 and a_k = 4^n (n!)^2 sqrt(pi) / (2n)! with
    n = |k|. For alpha = pi/2 the squared norm of model_eigenfunction is
    integrated numerically.

    Raises:
        UnsupportedBoundaryError: If bc is a general real alpha
    """
    bc = as_model_boundary(bc)
    eigenvalue = half_axis_eigenvalue(k, bc)
    if bc is Boundary.ALPHA_0:
        return SpectralPoint(eigenvalue, _closed_form_norming(k))
    return SpectralPoint(eigenvalue, _quadrature_norming(whole_axis_index(k, bc), bc, tol))


def model_spectral_points(bc: BoundaryLike, k_min: int, k_max: int) -> list[SpectralPoint]:
    """Spectral points for k_min <= k <= k_max, sorted by eigenvalue."""
    if k_min > k_max:
        raise ValueError(f"Empty index window: k_min={k_min} > k_max={k_max}")
    return [norming_constant(k, bc) for k in range(k_min, k_max + 1)]


def index_window(lam: float) -> int:
    """Bound K such that every model eigenvalue with |lambda| <= |lam| has |k| <= K."""
    return int(math.ceil(lam * lam / 2.0)) + 1


def spectral_function(lam: float, points: Sequence[SpectralPoint]) -> float:
    """Step function with jumps 1/a_n at the eigenvalues, normalized to 0 at 0.

    Sums 1/a_n over 0 < lambda_n <= lam for lam > 0 and returns minus the sum
    over lam < lambda_n <= 0 for lam < 0.

    Raises:
        UnsortedSpectrumError: If points are not sorted by eigenvalue
    """
    eigenvalues = np.array([point.eigenvalue for point in points], dtype=np.float64)
    if eigenvalues.size > 1 and np.any(np.diff(eigenvalues) < 0):
        raise UnsortedSpectrumError("Spectral points must be sorted by eigenvalue")
    if lam > 0:
        return math.fsum(point.jump for point in points if 0 < point.eigenvalue <= lam)
    if lam < 0:
        return -math.fsum(point.jump for point in points if lam < point.eigenvalue <= 0)
    return 0.0
