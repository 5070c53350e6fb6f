"""Cauchy problem for the canonical Dirac system.

    B y' + Omega(x) y = lam y,   y(0) = (sin alpha, -cos alpha)

with B = [[0, 1], [-1, 0]] and Omega = [[p, q], [q, -p]]. Written out,

    y1' = q y1 - (p + lam) y2
    y2' = (lam - p) y1 - q y2

Integration uses the 8th-order Dormand-Prince pair with dense output.
"""

import logging
import math
from collections.abc import Callable

import numpy as np
from scipy.integrate import solve_ivp

from dirac_spectra.errors import CauchyTruncatedError, GridError, SpectrumCollisionError
from dirac_spectra.models.grid import FloatArray, Grid, VectorTrajectory
from dirac_spectra.models.spectral import (
    Boundary,
    CauchyProblem,
    PotentialField,
    as_model_boundary,
    cauchy_data,
)
from dirac_spectra.spectral.model import nearest_model_eigenvalue

logger = logging.getLogger(__name__)

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-14
COLLISION_TOL = 1e-9

# Solutions are abandoned once their norm passes this bound
OVERFLOW_GUARD = 1e250

METHOD = "DOP853"


def _rhs(potential: PotentialField, lam: float) -> Callable[[float, FloatArray], FloatArray]:
    p_of = potential.p
    q_of = potential.q

    def rhs(x: float, y: FloatArray) -> FloatArray:
        p = float(p_of(x))
        q = float(q_of(x))
        return np.array([q * y[0] - (p + lam) * y[1], (lam - p) * y[0] - q * y[1]])

    return rhs


def _overflow(x: float, y: FloatArray) -> float:
    return OVERFLOW_GUARD - math.hypot(y[0], y[1])


_overflow.terminal = True  # type: ignore[attr-defined]


def solve_cauchy(
    problem: CauchyProblem,
    grid: Grid,
    *,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    strict: bool = False,
) -> VectorTrajectory:
    """Integrate the Cauchy problem across a half-axis grid.

    The node at x = 0 holds the Cauchy data exactly. The returned trajectory
    carries the integrator's dense output as its evaluator.

    Args:
        problem: Potential, spectral parameter and boundary parameter
        grid: Nodes to sample; must start at 0
        rtol: Relative local tolerance
        atol: Absolute local tolerance
        strict: Raise instead of returning a truncated trajectory

    Returns:
        Solution sampled on the grid, or on its leading part when the
        integrator stopped early (`truncated_at` is then set)

    Raises:
        GridError: If the grid does not start at 0
        CauchyTruncatedError: If strict and the integration stopped early
    """
    if grid.x_min != 0.0:
        raise GridError(f"Cauchy problems start at x = 0, grid starts at {grid.x_min}")
    start = np.array(cauchy_data(problem.alpha), dtype=np.float64)
    solution = solve_ivp(
        _rhs(problem.potential, problem.lam),
        (0.0, grid.x_max),
        start,
        method=METHOD,
        rtol=rtol,
        atol=atol,
        dense_output=True,
        events=_overflow,
    )
    logger.debug(
        "Cauchy lam=%.10g: %d steps, %d evaluations, status %d",
        problem.lam,
        solution.t.size - 1,
        solution.nfev,
        solution.status,
    )

    reached = float(solution.t[-1])
    target = grid
    truncated_at: float | None = None
    if solution.status != 0 or reached < grid.x_max:
        truncated_at = reached
        message = (
            f"Integration for lam={problem.lam} stopped at x={reached:.6g} "
            f"before {grid.x_max}: {solution.message}"
        )
        if strict:
            raise CauchyTruncatedError(message, reached)
        logger.warning(message)
        target = grid.restricted(reached)

    dense = solution.sol
    values = np.asarray(dense(target.nodes), dtype=np.float64).reshape(2, target.size)
    values[:, 0] = start
    return VectorTrajectory(
        target,
        values[0],
        values[1],
        evaluator=lambda s: np.asarray(dense(s), dtype=np.float64),
        truncated_at=truncated_at,
    )


def shoot(
    potential: PotentialField,
    lam: float,
    alpha: Boundary | float,
    x_end: float,
    *,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> tuple[float, float]:
    """Value of the Cauchy solution at x_end.

    Raises:
        CauchyTruncatedError: If the integration stops before x_end
    """
    solution = solve_ivp(
        _rhs(potential, lam),
        (0.0, x_end),
        np.array(cauchy_data(alpha), dtype=np.float64),
        method=METHOD,
        rtol=rtol,
        atol=atol,
        events=_overflow,
    )
    reached = float(solution.t[-1])
    if solution.status != 0 or reached < x_end:
        raise CauchyTruncatedError(
            f"Shooting at lam={lam} stopped at x={reached:.6g}: {solution.message}", reached
        )
    return float(solution.y[0, -1]), float(solution.y[1, -1])


def reference_solution_W(
    mu: float,
    grid: Grid,
    bc: Boundary = Boundary.ALPHA_0,
    *,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> VectorTrajectory:
    """Model Cauchy solution at a spectral parameter outside the model spectrum.

    Used as the source of an added eigenvalue.

    Raises:
        SpectrumCollisionError: If mu is within COLLISION_TOL of a model eigenvalue
        CauchyTruncatedError: If the integration stops before the end of the grid
    """
    bc = as_model_boundary(bc)
    nearest = nearest_model_eigenvalue(mu, bc)
    if abs(mu - nearest) <= COLLISION_TOL:
        raise SpectrumCollisionError(
            f"mu={mu} coincides with the model eigenvalue {nearest:.10g} ({bc.value})"
        )
    problem = CauchyProblem(PotentialField.model(), mu, bc)
    return solve_cauchy(problem, grid, rtol=rtol, atol=atol, strict=True)
