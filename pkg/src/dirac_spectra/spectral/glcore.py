"""Gel'fand-Levitan engine for finite spectral perturbations of the model.

A plan changes the model spectral function by finitely many point masses
kappa_k at eigenvalues lambda_k. The kernel

    F(x, y) = sum_k kappa_k psi_k(x) psi_k(y)^T

is then degenerate, where psi_k is the model Cauchy solution at lambda_k
(a model eigenfunction V_k, or a reference solution W for an added
eigenvalue). The transformation kernel takes the form
G(x, y) = sum_k g_k(x) psi_k(y)^T and the integral equation

    G(x, y) + F(x, y) + int_0^x G(x, s) F(s, y) ds = 0,   0 <= y <= x

collapses to one n x n linear system per x:

    g_i + kappa_i sum_k m_ik(x) g_k = -kappa_i psi_i(x),
    m_ik(x) = int_0^x psi_i(s)^T psi_k(s) ds.

The perturbed potential follows from G(x, x) = [[a, b], [c, d]] as
p = -(b + c) and q = x + a - d.

Where two decaying sources meet, a_i delta_ik - m_ik(x) is replaced by the
tail integral from x to infinity once the tail is the smaller part. A
removal row then has no unit term left to cancel against.
"""

import logging
import math
import threading
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import CubicSpline
from scipy.special import erfcx

from dirac_spectra.errors import (
    CompositionError,
    CrossPathMismatchError,
    GridError,
    PlanValidationError,
    RemovedIndexError,
    SingularSystemError,
)
from dirac_spectra.models.grid import FloatArray, Grid, VectorTrajectory
from dirac_spectra.models.plan import NORMING_RTOL, Addition, EigenIndex, PerturbationPlan
from dirac_spectra.models.spectral import Boundary, PotentialField, SpectralPoint
from dirac_spectra.numerics.cauchy import DEFAULT_ATOL, DEFAULT_RTOL, reference_solution_W
from dirac_spectra.numerics.quadrature import (
    TAIL_ORDER,
    TAIL_PANEL_WIDTH,
    cumulative_inner,
    gauss_legendre_panels,
)
from dirac_spectra.spectral import model

logger = logging.getLogger(__name__)

DEFAULT_SINGULAR_FLOOR = 1e-13
CROSS_PATH_TOL = 1e-9
CRAMER_MAX_RANK = 3


class JumpKind(str, Enum):
    """How a jump changes the spectral function."""

    REMOVE = "remove"
    RESCALE = "rescale"
    ADD = "add"


@dataclass(frozen=True, eq=False)
class SpectralJump:
    """Point mass `coefficient` of the spectral function difference at `eigenvalue`."""

    kind: JumpKind
    index: EigenIndex
    eigenvalue: float
    coefficient: float
    source: VectorTrajectory
    norming_before: float | None = None
    norming_after: float | None = None

    def __post_init__(self) -> None:
        if self.coefficient == 0.0:
            raise PlanValidationError(f"Zero jump at lambda={self.eigenvalue}")

    @property
    def decays(self) -> bool:
        """Whether the source is square integrable (a model eigenfunction)."""
        return self.kind is not JumpKind.ADD

    @property
    def base(self) -> float:
        """1 + kappa a, the diagonal left once the full inner product is split off."""
        if self.kind is JumpKind.REMOVE:
            return 0.0
        if self.kind is JumpKind.RESCALE:
            assert self.norming_before is not None and self.norming_after is not None
            return self.norming_before / self.norming_after
        return 1.0


def build_jumps(
    plan: PerturbationPlan,
    grid: Grid,
    *,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> list[SpectralJump]:
    """Materialize the jumps of a plan with their sources on a grid.

    Order: removals by index, rescalings by index, additions as listed.

    Raises:
        PlanValidationError: If a rescaling leaves its norming unchanged
        SpectrumCollisionError: If an added mu is a model eigenvalue
    """
    plan.validated()
    jumps: list[SpectralJump] = []
    for k in sorted(plan.removals):
        point = model.norming_constant(k, plan.bc)
        jumps.append(
            SpectralJump(
                JumpKind.REMOVE,
                k,
                point.eigenvalue,
                -1.0 / point.norming,
                model.model_eigenfunction(k, plan.bc, grid),
                norming_before=point.norming,
            )
        )
    for k, b in plan.rescalings.items():
        point = model.norming_constant(k, plan.bc)
        jumps.append(
            SpectralJump(
                JumpKind.RESCALE,
                k,
                point.eigenvalue,
                1.0 / b - 1.0 / point.norming,
                model.model_eigenfunction(k, plan.bc, grid),
                norming_before=point.norming,
                norming_after=b,
            )
        )
    for addition in plan.additions:
        source = reference_solution_W(addition.mu, grid, plan.bc, rtol=rtol, atol=atol)
        jumps.append(
            SpectralJump(
                JumpKind.ADD,
                addition.mu,
                addition.mu,
                1.0 / addition.norming,
                source,
                norming_after=addition.norming,
            )
        )
    logger.debug("Plan %s: %d jumps", plan.describe(), len(jumps))
    return jumps


def _pair_integrals(sources: Sequence[VectorTrajectory], a: float, b: float) -> FloatArray:
    """Matrix of int_a^b psi_i^T psi_j over a short span (a < b)."""
    panels = max(1, math.ceil((b - a) / TAIL_PANEL_WIDTH))
    points, weights = gauss_legendre_panels(np.linspace(a, b, panels + 1), TAIL_ORDER)
    flat_points = points.ravel()
    flat_weights = weights.ravel()
    values = np.stack([source.at(flat_points) for source in sources])
    return np.einsum("ipz,jpz,z->ij", values, values, flat_weights)


@dataclass(frozen=True, eq=False)
class KernelTable:
    """Pairwise inner products of the jump sources over [0, x] and [x, inf).

    `cumulative[t, i, j]` is m_ij at node t. `tails[t, i, j]` is filled
    only where both sources decay and is 0 elsewhere.
    """

    grid: Grid
    sources: tuple[VectorTrajectory, ...]
    decaying: NDArray[np.bool_]
    cumulative: FloatArray
    tails: FloatArray

    @classmethod
    def tabulate(cls, jumps: Sequence[SpectralJump], grid: Grid) -> "KernelTable":
        """Integrate every source pair across the grid."""
        size = len(jumps)
        cumulative = np.zeros((grid.size, size, size))
        tails = np.zeros((grid.size, size, size))
        decaying = np.array([jump.decays for jump in jumps], dtype=bool)
        for i in range(size):
            for j in range(i, size):
                both = bool(decaying[i] and decaying[j])
                integral = cumulative_inner(
                    jumps[i].source, jumps[j].source, grid, with_tail=both
                )
                cumulative[:, i, j] = cumulative[:, j, i] = integral.values
                if both and integral.tails is not None:
                    tails[:, i, j] = tails[:, j, i] = integral.tails
        logger.debug("Tabulated %d source pairs on %d nodes", size * (size + 1) // 2, grid.size)
        return cls(grid, tuple(jump.source for jump in jumps), decaying, cumulative, tails)

    @property
    def rank(self) -> int:
        """Number of sources."""
        return len(self.sources)

    def at(self, x: float) -> tuple[FloatArray, FloatArray]:
        """Cumulative and tail matrices at any x in the grid range.

        Raises:
            GridError: If x lies outside the grid
        """
        nodes = self.grid.nodes
        if not (nodes[0] <= x <= nodes[-1]):
            raise GridError(f"x={x} lies outside the tabulated range [0, {self.grid.x_max}]")
        k = self.grid.locate(x)
        if x == nodes[k]:
            return self.cumulative[k], self.tails[k]
        if x == nodes[k + 1]:
            return self.cumulative[k + 1], self.tails[k + 1]
        head = _pair_integrals(self.sources, float(nodes[k]), x)
        rest = _pair_integrals(self.sources, x, float(nodes[k + 1]))
        both = np.outer(self.decaying, self.decaying)
        return self.cumulative[k] + head, np.where(both, self.tails[k + 1] + rest, 0.0)

    def source_values(self, x: ArrayLike) -> FloatArray:
        """Sources at the given points, shape (len(x), n, 2)."""
        points = np.atleast_1d(np.asarray(x, dtype=np.float64))
        if not self.sources:
            return np.zeros((points.size, 0, 2))
        values = np.stack([source.at(points) for source in self.sources])
        return np.transpose(values, (2, 0, 1))


def _far_rows(
    decaying: NDArray[np.bool_], cumulative: FloatArray, tails: FloatArray
) -> NDArray[np.bool_]:
    diagonal_cum = np.diagonal(cumulative, axis1=-2, axis2=-1)
    diagonal_tail = np.diagonal(tails, axis1=-2, axis2=-1)
    return decaying & (diagonal_cum > diagonal_tail)


def _system(
    jumps: Sequence[SpectralJump],
    decaying: NDArray[np.bool_],
    cumulative: FloatArray,
    tails: FloatArray,
    psi: FloatArray,
) -> tuple[FloatArray, FloatArray]:
    """S and H for a stack of abscissae; shapes (..., n, n) and (..., n, 2)."""
    kappa = np.array([jump.coefficient for jump in jumps])
    base = np.array([jump.base for jump in jumps])
    size = kappa.size
    near = np.eye(size) + kappa[:, None] * cumulative
    far = np.diag(base) - kappa[:, None] * tails
    mask = _far_rows(decaying, cumulative, tails)[..., :, None] & decaying[None, :]
    matrix = np.where(mask, far, near)
    columns = -kappa[:, None] * psi
    return matrix, columns


@dataclass(frozen=True, eq=False)
class _Solution:
    solution: FloatArray
    determinant: FloatArray
    scaled_matrix: FloatArray
    scaled_columns: FloatArray


def _solve(
    matrix: FloatArray, columns: FloatArray, xs: FloatArray, singular_floor: float
) -> _Solution:
    """Row-equilibrated LU solve with the singularity check."""
    row_scale = np.max(np.abs(matrix), axis=-1, keepdims=True)
    row_scale = np.where(row_scale > 0, row_scale, 1.0)
    scaled_matrix = matrix / row_scale
    scaled_columns = columns / row_scale
    sign, logabs = np.linalg.slogdet(scaled_matrix)
    bad = np.flatnonzero(np.atleast_1d(logabs < math.log(singular_floor)))
    if bad.size:
        x = float(np.atleast_1d(xs)[bad[0]])
        raise SingularSystemError(
            f"Gel'fand-Levitan system is singular at x={x:.6g} "
            f"(equilibrated |det S| = {math.exp(float(np.atleast_1d(logabs)[bad[0]])):.3e})",
            x,
        )
    solution = np.linalg.solve(scaled_matrix, scaled_columns)
    log_scale = np.sum(np.log(row_scale[..., 0]), axis=-1)
    determinant = sign * np.exp(logabs + log_scale)
    return _Solution(solution, determinant, scaled_matrix, scaled_columns)


def _cramer(scaled_matrix: FloatArray, scaled_columns: FloatArray) -> FloatArray:
    """g_{k,p} = det S_p^(k) / det S, with S_p^(k) the matrix whose column k is H_p."""
    size = scaled_matrix.shape[-1]
    denominator = np.linalg.det(scaled_matrix)
    solution = np.empty(scaled_columns.shape)
    for k in range(size):
        for p in range(2):
            replaced = scaled_matrix.copy()
            replaced[..., :, k] = scaled_columns[..., :, p]
            solution[..., k, p] = np.linalg.det(replaced) / denominator
    return solution


def _diagonal_kernel(solution: FloatArray, psi: FloatArray) -> FloatArray:
    """G(x, x) = sum_k g_k psi_k^T, shape (..., 2, 2)."""
    return np.einsum("...kp,...kq->...pq", solution, psi)


def _potential_from(kernel: FloatArray, xs: FloatArray) -> tuple[FloatArray, FloatArray]:
    a = kernel[..., 0, 0]
    b = kernel[..., 0, 1]
    c = kernel[..., 1, 0]
    d = kernel[..., 1, 1]
    return -(b + c), xs + (a - d)


def _check_paths(
    kernel: FloatArray,
    lu_pair: tuple[FloatArray, FloatArray],
    cramer_solution: FloatArray,
    psi: FloatArray,
    xs: FloatArray,
) -> None:
    p_lu, q_lu = lu_pair
    p_cr, q_cr = _potential_from(_diagonal_kernel(cramer_solution, psi), xs)
    scale = np.maximum.reduce(
        [
            np.ones_like(xs),
            np.abs(xs),
            np.abs(kernel[..., 0, 0]) + np.abs(kernel[..., 1, 1]),
            np.abs(kernel[..., 0, 1]) + np.abs(kernel[..., 1, 0]),
        ]
    )
    gap = np.maximum(np.abs(p_lu - p_cr), np.abs(q_lu - q_cr)) / scale
    bad = np.flatnonzero(np.atleast_1d(gap > CROSS_PATH_TOL))
    if bad.size:
        x = float(np.atleast_1d(xs)[bad[0]])
        raise CrossPathMismatchError(
            f"LU and Cramer potentials disagree at x={x:.6g} "
            f"(relative gap {float(np.atleast_1d(gap)[bad[0]]):.3e})",
            x,
        )


@dataclass(frozen=True, eq=False)
class GLSystem:
    """The Gel'fand-Levitan system S g_p = H_p at one abscissa."""

    x: float
    matrix: FloatArray
    columns: FloatArray
    solution: FloatArray
    determinant: float

    @property
    def rank(self) -> int:
        """Number of jumps."""
        return int(self.matrix.shape[0])


def assemble_system(
    jumps: Sequence[SpectralJump],
    x: float,
    table: KernelTable | None = None,
    *,
    singular_floor: float = DEFAULT_SINGULAR_FLOOR,
) -> GLSystem:
    """Assemble and solve the system at x.

    Args:
        jumps: Jumps of the plan, sources on a common grid
        x: Abscissa inside the sources' grid
        table: Precomputed pair integrals; tabulated on the fly if omitted
        singular_floor: Lower bound for the row-equilibrated |det S|

    Raises:
        GridError: If x is negative or beyond the grid
        SingularSystemError: If the system is numerically singular at x
    """
    if x < 0:
        raise GridError(f"x must be non-negative, got {x}")
    if not jumps:
        empty = np.zeros((0, 2))
        return GLSystem(x, np.zeros((0, 0)), empty, empty, 1.0)
    if table is None:
        table = KernelTable.tabulate(jumps, jumps[0].source.grid)
    cumulative, tails = table.at(x)
    psi = table.source_values(x)[0]
    matrix, columns = _system(jumps, table.decaying, cumulative, tails, psi)
    solved = _solve(matrix, columns, np.array(x), singular_floor)
    return GLSystem(x, matrix, columns, solved.solution, float(solved.determinant))


def _tabulated_evaluator(grid: Grid, values: FloatArray) -> "_Tabulated":
    return _Tabulated(grid.x_max, CubicSpline(grid.nodes, values, axis=1))


@dataclass(frozen=True)
class _Tabulated:
    """Spline through node values of a decaying function; 0 beyond the last node."""

    x_max: float
    spline: CubicSpline

    def __call__(self, s: FloatArray) -> FloatArray:
        points = np.atleast_1d(np.asarray(s, dtype=np.float64))
        inside = (points >= 0.0) & (points <= self.x_max)
        out = np.zeros((2, points.size))
        if np.any(inside):
            out[:, inside] = self.spline(points[inside])
        return out


@dataclass(frozen=True, eq=False)
class PerturbedOperator:
    """A model operator with its spectral function changed by a plan.

    Node values of the potential and of g are tabulated once by `synthesize`;
    eigenfunctions are assembled on demand and cached under a lock, so one
    operator can be shared between threads.
    """

    plan: PerturbationPlan
    grid: Grid
    jumps: tuple[SpectralJump, ...]
    table: KernelTable
    solutions: FloatArray
    determinants: FloatArray
    p_values: FloatArray
    q_values: FloatArray
    singular_floor: float = DEFAULT_SINGULAR_FLOOR
    _eigenfunctions: dict[tuple[str, float], VectorTrajectory] = field(
        default_factory=dict, repr=False
    )
    _cache_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def bc(self) -> Boundary:
        """Boundary condition of the base model."""
        return self.plan.bc

    @cached_property
    def potential(self) -> PotentialField:
        """Spline through the tabulated potential."""
        return potential_field(self)

    @property
    def determinant_violations(self) -> FloatArray:
        """Nodes where det S is not positive."""
        return self.grid.nodes[self.determinants <= 0]

    def _jump_position(self, index: EigenIndex) -> int | None:
        if isinstance(index, bool):
            raise RemovedIndexError(f"Invalid eigenfunction index {index!r}")
        if isinstance(index, int):
            if index in self.plan.removals:
                raise RemovedIndexError(f"Eigenvalue index k={index} is removed by the plan")
            for position, jump in enumerate(self.jumps):
                if jump.kind is JumpKind.RESCALE and jump.index == index:
                    return position
            return None
        found = self.plan.find_addition(float(index))
        if found is None:
            raise RemovedIndexError(f"The plan adds no eigenvalue at mu={index}")
        return len(self.plan.removals) + len(self.plan.rescalings) + found

    def eigenvalue(self, index: EigenIndex) -> float:
        """Eigenvalue addressed by index.

        Raises:
            RemovedIndexError: If the index was removed or never added
        """
        position = self._jump_position(index)
        if position is not None:
            return self.jumps[position].eigenvalue
        return model.half_axis_eigenvalue(int(index), self.bc)

    def norming(self, index: EigenIndex) -> float:
        """Prescribed norming constant of the eigenvalue addressed by index."""
        position = self._jump_position(index)
        if position is not None:
            after = self.jumps[position].norming_after
            assert after is not None
            return after
        return model.norming_constant(int(index), self.bc).norming

    def spectral_data(self, k_min: int, k_max: int) -> list[tuple[EigenIndex, SpectralPoint]]:
        """Indexed post-perturbation spectrum over a model index window.

        Additions are listed when they fall between the eigenvalues of k_min
        and k_max. Sorted by eigenvalue.
        """
        items: list[tuple[EigenIndex, SpectralPoint]] = []
        for k in range(k_min, k_max + 1):
            if k in self.plan.removals:
                continue
            eigenvalue = model.half_axis_eigenvalue(k, self.bc)
            items.append((k, SpectralPoint(eigenvalue, self.norming(k))))
        lo = model.half_axis_eigenvalue(k_min, self.bc)
        hi = model.half_axis_eigenvalue(k_max, self.bc)
        for addition in self.plan.additions:
            if lo <= addition.mu <= hi:
                items.append((addition.mu, SpectralPoint(addition.mu, addition.norming)))
        items.sort(key=lambda item: item[1].eigenvalue)
        return items

    def spectral_points(self, k_min: int, k_max: int) -> list[SpectralPoint]:
        """Post-perturbation spectral points over a model index window."""
        return [point for _, point in self.spectral_data(k_min, k_max)]

    def spectral_function(self, lam: float) -> float:
        """Perturbed spectral function at lam."""
        bound = model.index_window(lam)
        points = self.spectral_points(-bound, bound)
        extra = [
            SpectralPoint(a.mu, a.norming)
            for a in self.plan.additions
            if not any(p.eigenvalue == a.mu for p in points)
        ]
        merged = sorted(points + extra, key=lambda point: point.eigenvalue)
        return model.spectral_function(lam, merged)

    def eigenfunction(self, index: EigenIndex) -> VectorTrajectory:
        """Perturbed eigenfunction on the operator's grid.

        Its value at 0 equals the model Cauchy data.

        Raises:
            RemovedIndexError: If the index was removed or never added
        """
        position = self._jump_position(index)
        key = ("k", float(index)) if position is None else ("jump", float(position))
        with self._cache_lock:
            trajectory = self._eigenfunctions.get(key)
            if trajectory is None:
                trajectory = self._assemble_eigenfunction(index, position)
                self._eigenfunctions[key] = trajectory
        return trajectory

    def _assemble_eigenfunction(self, index: EigenIndex, position: int | None) -> VectorTrajectory:
        if position is not None:
            jump = self.jumps[position]
            values = -self.solutions[:, position, :].T / jump.coefficient
        else:
            values = self._surviving_values(int(index))
        return VectorTrajectory(
            self.grid,
            values[0],
            values[1],
            evaluator=_tabulated_evaluator(self.grid, values),
        )

    def _surviving_values(self, m: int) -> FloatArray:
        base = model.model_eigenfunction(m, self.bc, self.grid)
        if not self.jumps:
            return base.values
        cross = np.empty((self.grid.size, len(self.jumps)))
        far = _far_rows(self.table.decaying, self.table.cumulative, self.table.tails)
        for k, jump in enumerate(self.jumps):
            integral = cumulative_inner(jump.source, base, self.grid, with_tail=jump.decays)
            cross[:, k] = integral.values
            if jump.decays and integral.tails is not None:
                # int_0^x = -int_x^inf for orthogonal model pairs
                cross[:, k] = np.where(far[:, k], -integral.tails, integral.values)
        correction = np.einsum("tkp,tk->pt", self.solutions, cross)
        return base.values + correction


def perturbed_potential(op: PerturbedOperator, x: float) -> tuple[float, float]:
    """Perturbed (p, q) at x by a fresh solve of the system.

    For up to CRAMER_MAX_RANK jumps the solve is repeated with Cramer's rule
    on the determinant formulas and both results must agree.

    Raises:
        GridError: If x lies outside the operator's grid
        SingularSystemError: If the system is singular at x
        CrossPathMismatchError: If LU and Cramer disagree
    """
    if not (op.grid.x_min <= x <= op.grid.x_max):
        raise GridError(f"x={x} lies outside [{op.grid.x_min}, {op.grid.x_max}]")
    if not op.jumps:
        return 0.0, float(x)
    cumulative, tails = op.table.at(x)
    psi = op.table.source_values(x)[0]
    matrix, columns = _system(op.jumps, op.table.decaying, cumulative, tails, psi)
    xs = np.array(float(x))
    solved = _solve(matrix, columns, xs, op.singular_floor)
    kernel = _diagonal_kernel(solved.solution, psi)
    p, q = _potential_from(kernel, xs)
    if len(op.jumps) <= CRAMER_MAX_RANK:
        cramer = _cramer(solved.scaled_matrix, solved.scaled_columns)
        _check_paths(kernel, (p, q), cramer, psi, xs)
    return float(p), float(q)


def perturbed_eigenfunction(
    op: PerturbedOperator, index: EigenIndex, grid: Grid
) -> VectorTrajectory:
    """Perturbed eigenfunction resampled on another grid inside the operator's range.

    Raises:
        RemovedIndexError: If the index was removed or never added
        GridError: If grid extends beyond the operator's grid
    """
    trajectory = op.eigenfunction(index)
    if grid.same_as(op.grid):
        return trajectory
    if grid.x_min < op.grid.x_min or grid.x_max > op.grid.x_max:
        raise GridError(
            f"Grid [{grid.x_min}, {grid.x_max}] exceeds the operator range "
            f"[{op.grid.x_min}, {op.grid.x_max}]"
        )
    assert trajectory.evaluator is not None
    return VectorTrajectory.from_evaluator(grid, trajectory.evaluator)


def closed_form_remove_zero(x: ArrayLike) -> tuple[FloatArray | float, FloatArray | float]:
    """Potential after removing the eigenvalue 0 from the alpha0 model.

    q = x - exp(-x^2) / int_x^inf exp(-s^2) ds = x - 2 / (sqrt(pi) erfcx(x)), p = 0.
    """
    xs = np.asarray(x, dtype=np.float64)
    q = xs - 2.0 / (math.sqrt(math.pi) * erfcx(xs))
    p = np.zeros_like(q)
    if q.ndim == 0:
        return float(p), float(q)
    return p, q


def synthesize(
    plan: PerturbationPlan,
    grid: Grid,
    *,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    singular_floor: float = DEFAULT_SINGULAR_FLOOR,
) -> PerturbedOperator:
    """Build the perturbed operator of a plan and tabulate it on a grid.

    Raises:
        PlanValidationError: If the plan is inconsistent with the model
        SpectrumCollisionError: If an added mu is a model eigenvalue
        SingularSystemError: At the first node where the system is singular
        CrossPathMismatchError: If LU and Cramer disagree at some node
    """
    logger.info("Synthesizing [%s] on %d nodes up to x=%g", plan.describe(), grid.size, grid.x_max)
    jumps = tuple(build_jumps(plan, grid, rtol=rtol, atol=atol))
    table = KernelTable.tabulate(jumps, grid)
    xs = grid.nodes
    if not jumps:
        empty = np.zeros((grid.size, 0, 2))
        return PerturbedOperator(
            plan, grid, jumps, table, empty, np.ones(grid.size), np.zeros(grid.size), xs.copy(),
            singular_floor,
        )

    psi = table.source_values(xs)
    matrix, columns = _system(jumps, table.decaying, table.cumulative, table.tails, psi)
    solved = _solve(matrix, columns, xs, singular_floor)
    kernel = _diagonal_kernel(solved.solution, psi)
    p_values, q_values = _potential_from(kernel, xs)
    if len(jumps) <= CRAMER_MAX_RANK:
        cramer = _cramer(solved.scaled_matrix, solved.scaled_columns)
        _check_paths(kernel, (p_values, q_values), cramer, psi, xs)

    violations = int(np.count_nonzero(solved.determinant <= 0))
    if violations:
        logger.warning("det S is not positive at %d of %d nodes", violations, grid.size)
    logger.info(
        "Synthesis done: %d jumps, min det S %.3e", len(jumps), float(np.min(solved.determinant))
    )
    return PerturbedOperator(
        plan,
        grid,
        jumps,
        table,
        solved.solution,
        solved.determinant,
        p_values,
        q_values,
        singular_floor,
    )


def potential_field(op: PerturbedOperator) -> PotentialField:
    """Cubic-spline potential through the tabulated node values, for ODE use."""
    if not op.jumps:
        return PotentialField.model()
    p_spline = CubicSpline(op.grid.nodes, op.p_values)
    q_spline = CubicSpline(op.grid.nodes, op.q_values)
    return PotentialField(
        p=lambda x: np.asarray(p_spline(x), dtype=np.float64),
        q=lambda x: np.asarray(q_spline(x), dtype=np.float64),
        description="gl-synthesized",
    )


def compose(
    op: PerturbedOperator,
    plan: PerturbationPlan,
    *,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> PerturbedOperator:
    """Apply a further plan to a perturbed operator.

    The second plan is read against the current spectrum of `op` and merged
    into one plan relative to the model, which is then synthesized afresh on
    the same grid. Rescalings that land back on the model norming constant
    vanish from the merged plan.

    Raises:
        CompositionError: If the boundary conditions differ, an index is
            removed twice or a removed index is rescaled
    """
    if plan.bc is not op.plan.bc:
        raise CompositionError(
            f"Cannot compose a {plan.bc.value} plan with a {op.plan.bc.value} operator"
        )
    removals = set(op.plan.removals)
    rescalings = dict(op.plan.rescalings)
    for k in plan.removals:
        if k in removals:
            raise CompositionError(f"Eigenvalue index k={k} is already removed")
        rescalings.pop(k, None)
        removals.add(k)
    for k, b in plan.rescalings.items():
        if k in removals:
            raise CompositionError(f"Cannot rescale removed eigenvalue index k={k}")
        rescalings[k] = b
    rescalings = {
        k: b
        for k, b in rescalings.items()
        if not math.isclose(b, model.norming_constant(k, op.bc).norming, rel_tol=NORMING_RTOL)
    }
    additions: list[Addition] = list(op.plan.additions)
    for addition in plan.additions:
        if op.plan.find_addition(addition.mu) is not None:
            raise CompositionError(f"Eigenvalue mu={addition.mu} is already added")
        additions.append(addition)
    merged = PerturbationPlan(
        bc=op.bc,
        removals=frozenset(removals),
        rescalings=rescalings,
        additions=tuple(additions),
    )
    logger.info("Composed plan: %s", merged.describe())
    return synthesize(merged, op.grid, rtol=rtol, atol=atol, singular_floor=op.singular_floor)


def kernel_F(op: PerturbedOperator, x: float, y: float) -> FloatArray:
    """F(x, y) = sum_k kappa_k psi_k(x) psi_k(y)^T."""
    if not op.jumps:
        return np.zeros((2, 2))
    kappa = np.array([jump.coefficient for jump in op.jumps])
    left = op.table.source_values(x)[0]
    right = op.table.source_values(y)[0]
    return np.einsum("k,kp,kq->pq", kappa, left, right)


def kernel_G(op: PerturbedOperator, x: float, y: float) -> FloatArray:
    """G(x, y) = sum_k g_k(x) psi_k(y)^T."""
    if not op.jumps:
        return np.zeros((2, 2))
    system = assemble_system(op.jumps, x, op.table, singular_floor=op.singular_floor)
    right = op.table.source_values(y)[0]
    return np.einsum("kp,kq->pq", system.solution, right)


def gl_residual(op: PerturbedOperator, x: float, y: float) -> float:
    """Relative residual of G + F + int_0^x G(x, s) F(s, y) ds at (x, y).

    The integral is taken by composite Gauss-Legendre quadrature over [0, x],
    independently of the tabulated pair integrals. The residual is scaled by
    the largest of the three terms.
    """
    if not 0.0 <= y <= x:
        raise GridError(f"Residual needs 0 <= y <= x, got x={x}, y={y}")
    if not op.jumps:
        return 0.0
    system = assemble_system(op.jumps, x, op.table, singular_floor=op.singular_floor)
    g = system.solution
    kappa = np.array([jump.coefficient for jump in op.jumps])
    right = op.table.source_values(y)[0]
    left_kernel = np.einsum("kp,kq->pq", g, right)
    f_kernel = kernel_F(op, x, y)
    if x > 0.0:
        gram = _pair_integrals(op.table.sources, 0.0, x)
        integral = np.einsum("kp,ki,i,iq->pq", g, gram, kappa, right)
    else:
        integral = np.zeros((2, 2))
    total = left_kernel + f_kernel + integral
    scale = max(
        float(np.max(np.abs(left_kernel))),
        float(np.max(np.abs(f_kernel))),
        float(np.max(np.abs(integral))),
        np.finfo(np.float64).tiny,
    )
    return float(np.max(np.abs(total))) / scale
