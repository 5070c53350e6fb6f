"""Grids, sampled vector trajectories and cumulative integrals."""

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from dirac_spectra.errors import GridError

FloatArray = NDArray[np.float64]

# s -> array of shape (2, len(s)); reentrant, vectorized
Evaluator = Callable[[FloatArray], FloatArray]


def _frozen(values: ArrayLike) -> FloatArray:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing sample nodes on the half axis."""

    nodes: FloatArray

    def __post_init__(self) -> None:
        nodes = _frozen(self.nodes)
        if nodes.ndim != 1 or nodes.size < 2:
            raise GridError(f"Grid needs at least 2 nodes, got shape {nodes.shape}")
        if not np.all(np.isfinite(nodes)):
            raise GridError("Grid nodes must be finite")
        if np.any(np.diff(nodes) <= 0):
            raise GridError("Grid nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, x_max: float, step: float, x_min: float = 0.0) -> "Grid":
        """Build a uniform grid from x_min to x_max with the given step.

        Args:
            x_max: Last node
            step: Node spacing; (x_max - x_min) must be a multiple of it
            x_min: First node

        Returns:
            Uniform grid including both endpoints
        """
        if step <= 0 or x_max <= x_min:
            raise GridError(f"Invalid grid: x_min={x_min}, x_max={x_max}, step={step}")
        span = (x_max - x_min) / step
        count = int(round(span))
        if count < 1 or abs(span - count) > 1e-9 * max(1.0, span):
            raise GridError(f"Grid span {x_max - x_min} is not a multiple of step {step}")
        nodes = x_min + step * np.arange(count + 1, dtype=np.float64)
        nodes[-1] = x_max
        return cls(nodes)

    @property
    def x_min(self) -> float:
        """First node."""
        return float(self.nodes[0])

    @property
    def x_max(self) -> float:
        """Last node."""
        return float(self.nodes[-1])

    @property
    def size(self) -> int:
        """Number of nodes."""
        return int(self.nodes.size)

    @property
    def step(self) -> float:
        """Spacing of a uniform grid.

        Raises:
            GridError: If the grid is not uniform
        """
        if not self.is_uniform:
            raise GridError("Grid is not uniform")
        return float(self.nodes[1] - self.nodes[0])

    @property
    def is_uniform(self) -> bool:
        """Whether all spacings agree to rounding."""
        spacing = np.diff(self.nodes)
        return bool(np.allclose(spacing, spacing[0], rtol=1e-9, atol=0.0))

    def same_as(self, other: "Grid") -> bool:
        """Whether two grids have identical nodes."""
        return self is other or (
            self.nodes.shape == other.nodes.shape and bool(np.array_equal(self.nodes, other.nodes))
        )

    def locate(self, x: float) -> int:
        """Index k of the panel [nodes[k], nodes[k+1]] holding x (clamped to the grid)."""
        k = int(np.searchsorted(self.nodes, x, side="right")) - 1
        return min(max(k, 0), self.size - 2)

    def head(self, count: int) -> "Grid":
        """Grid of the first `count` nodes."""
        return Grid(self.nodes[:count])

    def restricted(self, x_max: float) -> "Grid":
        """Grid of the nodes not exceeding x_max."""
        return self.head(int(np.searchsorted(self.nodes, x_max, side="right")))

    def __repr__(self) -> str:
        return f"<Grid(x_min={self.x_min}, x_max={self.x_max}, size={self.size})>"


@dataclass(frozen=True, eq=False)
class VectorTrajectory:
    """A two-component real function sampled on a grid.

    Closed-form and dense-output trajectories also carry an evaluator, which
    quadrature uses between and beyond the grid nodes.
    """

    grid: Grid
    component1: FloatArray
    component2: FloatArray
    evaluator: Evaluator | None = field(default=None, repr=False)
    truncated_at: float | None = None

    def __post_init__(self) -> None:
        first = _frozen(self.component1)
        second = _frozen(self.component2)
        if first.shape != (self.grid.size,) or second.shape != (self.grid.size,):
            raise GridError(
                f"Trajectory components have shapes {first.shape}, {second.shape}; "
                f"grid has {self.grid.size} nodes"
            )
        object.__setattr__(self, "component1", first)
        object.__setattr__(self, "component2", second)

    @classmethod
    def from_evaluator(cls, grid: Grid, evaluator: Evaluator) -> "VectorTrajectory":
        """Sample an evaluator on the grid nodes."""
        values = evaluator(grid.nodes)
        return cls(grid, values[0], values[1], evaluator=evaluator)

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorTrajectory":
        """The trivial solution."""
        return cls.from_evaluator(grid, lambda s: np.zeros((2, np.size(s))))

    @property
    def values(self) -> FloatArray:
        """Samples as an array of shape (2, n)."""
        return np.vstack((self.component1, self.component2))

    @property
    def has_evaluator(self) -> bool:
        """Whether the trajectory can be evaluated off the grid."""
        return self.evaluator is not None

    def at(self, s: ArrayLike) -> FloatArray:
        """Evaluate at arbitrary abscissae, shape (2, len(s)).

        Raises:
            GridError: If the trajectory has no evaluator
        """
        if self.evaluator is None:
            raise GridError("Trajectory has samples only; no evaluator for off-grid points")
        points = np.atleast_1d(np.asarray(s, dtype=np.float64))
        return np.asarray(self.evaluator(points), dtype=np.float64).reshape(2, points.size)

    def origin(self) -> tuple[float, float]:
        """Value at the first grid node."""
        return float(self.component1[0]), float(self.component2[0])


@dataclass(frozen=True, eq=False)
class CumulativeIntegral:
    """Running integral of a fixed integrand on a grid.

    `tails[k]` holds the integral from nodes[k] to infinity, accumulated without
    subtracting from `total`; it is absent for integrands that do not decay.
    """

    grid: Grid
    values: FloatArray
    total: float
    tails: FloatArray | None = None

    def __post_init__(self) -> None:
        values = _frozen(self.values)
        if values.shape != (self.grid.size,):
            raise GridError(f"Cumulative values have shape {values.shape}, grid {self.grid.size}")
        object.__setattr__(self, "values", values)
        if self.tails is not None:
            object.__setattr__(self, "tails", _frozen(self.tails))
