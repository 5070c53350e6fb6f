"""Boundary conditions, spectral points, potentials and Cauchy problems."""

import math
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from dirac_spectra.errors import UnsupportedBoundaryError

ScalarField = Callable[[ArrayLike], NDArray[np.float64]]


class Boundary(str, Enum):
    """Model boundary conditions y1(0) cos(alpha) + y2(0) sin(alpha) = 0."""

    ALPHA_0 = "alpha0"
    ALPHA_HALF_PI = "alphaPiOver2"

    @property
    def alpha(self) -> float:
        """Boundary parameter in radians."""
        return 0.0 if self is Boundary.ALPHA_0 else math.pi / 2.0

    @property
    def cauchy_data(self) -> tuple[float, float]:
        """Initial value (sin alpha, -cos alpha), exact for both model values."""
        return (0.0, -1.0) if self is Boundary.ALPHA_0 else (1.0, 0.0)

    @property
    def constrained_component(self) -> int:
        """Index (0 or 1) of the component the boundary condition forces to zero at 0."""
        return 0 if self is Boundary.ALPHA_0 else 1


BoundaryLike = Boundary | float


def as_model_boundary(bc: BoundaryLike) -> Boundary:
    """Return the model boundary, rejecting general real alpha.

    Raises:
        UnsupportedBoundaryError: If bc is a plain real alpha
    """
    if isinstance(bc, Boundary):
        return bc
    raise UnsupportedBoundaryError(
        f"Closed-form spectral data exist only for alpha0 and alphaPiOver2, got alpha={bc}"
    )


def cauchy_data(bc: BoundaryLike) -> tuple[float, float]:
    """Initial value (sin alpha, -cos alpha) of the Cauchy problem."""
    if isinstance(bc, Boundary):
        return bc.cauchy_data
    return math.sin(bc), -math.cos(bc)


@dataclass(frozen=True)
class SpectralPoint:
    """One eigenvalue with its norming constant."""

    eigenvalue: float
    norming: float

    def __post_init__(self) -> None:
        if not self.norming > 0:
            raise ValueError(f"Norming constant must be positive, got {self.norming}")

    @property
    def jump(self) -> float:
        """Jump of the spectral function at the eigenvalue."""
        return 1.0 / self.norming


def _zero_field(x: ArrayLike) -> NDArray[np.float64]:
    return np.zeros_like(np.asarray(x, dtype=np.float64))


def _linear_field(x: ArrayLike) -> NDArray[np.float64]:
    return np.array(x, dtype=np.float64)


@dataclass(frozen=True)
class PotentialField:
    """Symmetric trace-free potential [[p, q], [q, -p]] given by its scalar pair.

    Both scalar functions must be vectorized and reentrant.
    """

    p: ScalarField
    q: ScalarField
    description: str = "custom"

    @classmethod
    def model(cls) -> "PotentialField":
        """The linear potential p = 0, q = x."""
        return cls(p=_zero_field, q=_linear_field, description="model")


@dataclass(frozen=True)
class CauchyProblem:
    """l y = lam y on (0, inf) with y(0) = (sin alpha, -cos alpha)."""

    potential: PotentialField
    lam: float
    alpha: BoundaryLike = Boundary.ALPHA_0
