"""Chebyshev-Hermite polynomials and orthonormal Hermite functions.

The orthonormal functions are generated by the normalized three-term
recurrence seeded with pi^(-1/4) exp(-x^2/2), so the raw polynomial (which
overflows near order 170) is never formed. For |x| beyond ~38 the seed
underflows and every order evaluates to exactly 0.
"""

import math

import numpy as np
from numpy.typing import ArrayLike, NDArray

from dirac_spectra.errors import HermiteOrderError

MAX_POLY_ORDER = 60

_PI_QUARTER = math.pi**-0.25


def _check_order(n: int) -> None:
    if n < 0:
        raise HermiteOrderError(f"Hermite order must be non-negative, got {n}")


def hermite_poly(n: int, x: ArrayLike) -> NDArray[np.float64] | float:
    """Evaluate the physicists' Hermite polynomial H_n by upward recurrence.

    Args:
        n: Order, at most MAX_POLY_ORDER
        x: Abscissa or array of abscissae

    Returns:
        H_n(x), a float for scalar input

    Raises:
        HermiteOrderError: If n is negative or above MAX_POLY_ORDER
    """
    _check_order(n)
    if n > MAX_POLY_ORDER:
        raise HermiteOrderError(
            f"Raw Hermite polynomials overflow beyond order {MAX_POLY_ORDER}, got {n}; use phi"
        )
    xs = np.asarray(x, dtype=np.float64)
    previous = np.ones_like(xs)
    if n == 0:
        return _unwrap(previous)
    current = 2.0 * xs
    for k in range(1, n):
        previous, current = current, 2.0 * xs * current - 2.0 * k * previous
    return _unwrap(current)


def normalization(n: int) -> float:
    """C_n = (2^n n! sqrt(pi))^(-1/2), the factor turning H_n e^(-x^2/2) orthonormal."""
    _check_order(n)
    return 1.0 / math.sqrt(2.0**n * math.factorial(n) * math.sqrt(math.pi))


def phi_batch(n_max: int, x: ArrayLike) -> NDArray[np.float64]:
    """Evaluate phi_0 .. phi_{n_max} in one recurrence pass.

    Args:
        n_max: Highest order
        x: Abscissa or array of abscissae

    Returns:
        Array of shape (n_max + 1,) + shape(x); row k is phi_k(x)
    """
    _check_order(n_max)
    xs = np.asarray(x, dtype=np.float64)
    out = np.empty((n_max + 1,) + xs.shape, dtype=np.float64)
    out[0] = _PI_QUARTER * np.exp(-0.5 * xs * xs)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * xs * out[0]
    for k in range(1, n_max):
        out[k + 1] = math.sqrt(2.0 / (k + 1)) * xs * out[k] - math.sqrt(k / (k + 1)) * out[k - 1]
    return out


def phi(n: int, x: ArrayLike) -> NDArray[np.float64] | float:
    """Orthonormal Hermite function phi_n(x) = C_n e^(-x^2/2) H_n(x)."""
    return _unwrap(phi_batch(n, x)[n])


def phi_derivative(n: int, x: ArrayLike) -> NDArray[np.float64] | float:
    """phi_n'(x) from the ladder relation phi_n' = sqrt(2n) phi_{n-1} - x phi_n."""
    xs = np.asarray(x, dtype=np.float64)
    values = phi_batch(n, xs)
    derivative = -xs * values[n]
    if n >= 1:
        derivative = derivative + math.sqrt(2.0 * n) * values[n - 1]
    return _unwrap(derivative)


def phi_derivative_batch(n_max: int, x: ArrayLike) -> NDArray[np.float64]:
    """Derivatives of phi_0 .. phi_{n_max}, same layout as phi_batch."""
    xs = np.asarray(x, dtype=np.float64)
    values = phi_batch(n_max, xs)
    derivatives = -xs * values
    if n_max >= 1:
        factors = np.sqrt(2.0 * np.arange(1, n_max + 1)).reshape((-1,) + (1,) * xs.ndim)
        derivatives[1:] += factors * values[:-1]
    return derivatives


def _unwrap(values: NDArray[np.float64]) -> NDArray[np.float64] | float:
    return float(values) if values.ndim == 0 else values
