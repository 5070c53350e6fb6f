"""Definite, cumulative and tail integrals on the half axis.

Scalar integrals use adaptive Gauss-Kronrod (QUADPACK). Inner products of
trajectories that carry an evaluator use composite Gauss-Legendre panels
aligned with the grid; sampled-only trajectories fall back to Simpson's rule
on the stored nodes. Tails are always integrated directly from x outwards,
never obtained by subtracting a running integral from its total.
"""

import logging
import math
from collections.abc import Callable
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray
from scipy import integrate as sp_integrate

from dirac_spectra.errors import GridError, QuadratureError
from dirac_spectra.models.grid import CumulativeIntegral, FloatArray, Grid, VectorTrajectory

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12
DEFAULT_LIMIT = 200

# Gauss-Legendre points per grid panel for inner products
PANEL_ORDER = 8

# Tail quadrature: start the Gaussian cut-off no earlier than this abscissa and
# integrate until exp(-s^2) has dropped by exp(-TAIL_DECAY) below its value there
TAIL_FLOOR = 8.0
TAIL_DECAY = 80.0
TAIL_PANEL_WIDTH = 1.0 / 16.0
TAIL_ORDER = 16

ScalarFunction = Callable[[float], float]
VectorFunction = Callable[[FloatArray], FloatArray]


def integrate(
    f: ScalarFunction,
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    *,
    limit: int = DEFAULT_LIMIT,
) -> float:
    """Adaptive Gauss-Kronrod estimate of the integral of f over [a, b].

    Args:
        f: Real integrand
        a: Lower limit
        b: Upper limit, greater than a
        tol: Absolute error target
        limit: Maximum number of subintervals

    Returns:
        Integral estimate

    Raises:
        GridError: If a >= b or tol <= 0
        QuadratureError: If the subdivision limit is reached above tol
    """
    if not a < b:
        raise GridError(f"Integration limits must satisfy a < b, got a={a}, b={b}")
    if not tol > 0:
        raise GridError(f"Quadrature tolerance must be positive, got {tol}")
    result = sp_integrate.quad(f, a, b, epsabs=tol, epsrel=0.0, limit=limit, full_output=1)
    value, error = float(result[0]), float(result[1])
    if len(result) > 3 and error > tol:
        raise QuadratureError(
            f"Quadrature on [{a}, {b}] did not converge: error estimate {error:.3e} > {tol:.3e} "
            f"({result[3]})"
        )
    logger.debug(
        "quad [%g, %g]: %d evaluations, error %.2e", a, b, result[2]["neval"], error
    )
    return value


@lru_cache(maxsize=8)
def _legendre(order: int) -> tuple[FloatArray, FloatArray]:
    points, weights = np.polynomial.legendre.leggauss(order)
    return points, weights


def gauss_legendre_panels(
    edges: FloatArray, order: int = PANEL_ORDER
) -> tuple[FloatArray, FloatArray]:
    """Quadrature points and weights for each panel between consecutive edges.

    Args:
        edges: Increasing panel boundaries
        order: Gauss-Legendre points per panel

    Returns:
        (points, weights), each of shape (len(edges) - 1, order)
    """
    reference, reference_weights = _legendre(order)
    left = edges[:-1, None]
    half = 0.5 * np.diff(edges)[:, None]
    points = left + half * (reference[None, :] + 1.0)
    weights = half * reference_weights[None, :]
    return points, weights


def panel_integrals(f: VectorFunction, edges: FloatArray, order: int = PANEL_ORDER) -> FloatArray:
    """Integral of a vectorized scalar function over every panel."""
    points, weights = gauss_legendre_panels(edges, order)
    values = f(points.ravel()).reshape(points.shape)
    return np.sum(values * weights, axis=1)


def _product(u: VectorTrajectory, w: VectorTrajectory) -> VectorFunction:
    def integrand(s: FloatArray) -> FloatArray:
        return np.sum(u.at(s) * w.at(s), axis=0)

    return integrand


def inner_between(u: VectorTrajectory, w: VectorTrajectory, a: float, b: float) -> float:
    """Integral of u1 w1 + u2 w2 over [a, b] for evaluator-backed trajectories.

    Meant for short spans (at most a few grid panels); returns 0 for a == b.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    panels = max(1, math.ceil((b - a) / TAIL_PANEL_WIDTH))
    edges = np.linspace(a, b, panels + 1)
    return sign * float(np.sum(panel_integrals(_product(u, w), edges, TAIL_ORDER)))


def tail_upper(x: float) -> float:
    """Upper limit of the tail quadrature that starts at x."""
    start = max(x, TAIL_FLOOR)
    return math.sqrt(start * start + TAIL_DECAY)


def tail_inner(u: VectorTrajectory, w: VectorTrajectory, x: float) -> float:
    """Integral of u1 w1 + u2 w2 from x to infinity.

    Both trajectories must decay at least like exp(-s^2/2) times a polynomial
    and carry evaluators. The integral is taken directly over [x, tail_upper(x)]
    with fixed-width Gauss-Legendre panels, which keeps full relative accuracy
    even where the tail is far below the total.

    Raises:
        GridError: If either trajectory has no evaluator
    """
    if not (u.has_evaluator and w.has_evaluator):
        raise GridError("Tail integrals need evaluator-backed trajectories")
    return inner_between(u, w, x, tail_upper(x))


def _check_grids(u: VectorTrajectory, w: VectorTrajectory, grid: Grid) -> None:
    if not (u.grid.same_as(grid) and w.grid.same_as(grid)):
        raise GridError("Trajectories are not sampled on the requested grid")


def cumulative_inner(
    u: VectorTrajectory,
    w: VectorTrajectory,
    grid: Grid,
    *,
    with_tail: bool = True,
) -> CumulativeIntegral:
    """Running integral of u1 w1 + u2 w2 from 0 to every grid node.

    Args:
        u: First trajectory
        w: Second trajectory
        grid: Grid both trajectories are sampled on
        with_tail: Refine `total` (and fill `tails`) with the integral beyond
            the last node; only meaningful for decaying integrands

    Returns:
        Cumulative integral; `values[0]` is 0

    Raises:
        GridError: If the trajectories are sampled on another grid
    """
    _check_grids(u, w, grid)
    if u.has_evaluator and w.has_evaluator:
        panels = panel_integrals(_product(u, w), grid.nodes)
        values = np.concatenate(([0.0], np.cumsum(panels)))
        if not with_tail:
            return CumulativeIntegral(grid, values, float(values[-1]))
        beyond = tail_inner(u, w, grid.x_max)
        suffix = np.cumsum(panels[::-1])[::-1]
        tails = np.concatenate((suffix, [0.0])) + beyond
        return CumulativeIntegral(grid, values, float(values[-1]) + beyond, tails)

    integrand = u.component1 * w.component1 + u.component2 * w.component2
    values = sp_integrate.cumulative_simpson(integrand, x=grid.nodes, initial=0.0)
    reverse = sp_integrate.cumulative_simpson(integrand[::-1], x=-grid.nodes[::-1], initial=0.0)
    return CumulativeIntegral(grid, values, float(values[-1]), reverse[::-1])


def gram_matrix(family: list[VectorTrajectory]) -> NDArray[np.float64]:
    """Matrix of half-axis inner products of a family sharing one grid."""
    if not family:
        return np.zeros((0, 0))
    grid = family[0].grid
    size = len(family)
    gram = np.empty((size, size))
    for i in range(size):
        for j in range(i, size):
            total = cumulative_inner(family[i], family[j], grid).total
            gram[i, j] = gram[j, i] = total
    return gram
