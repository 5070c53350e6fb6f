"""Independent checks that a synthesized operator has the prescribed spectrum.

Residuals use finite differences on the tabulated eigenfunctions, norming
constants and orthogonality use quadrature, and eigenvalues are located by
shooting: the Cauchy solution at a non-eigenvalue grows like exp(x^2/2), so
log |psi(X, lam)| has deep narrow minima at the eigenvalues.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize_scalar

from dirac_spectra.errors import GridError
from dirac_spectra.models.grid import FloatArray, Grid, VectorTrajectory
from dirac_spectra.models.plan import EigenIndex
from dirac_spectra.models.report import CheckResult, SpectralPointSchema, VerificationReport
from dirac_spectra.models.spectral import Boundary, PotentialField
from dirac_spectra.numerics.cauchy import DEFAULT_ATOL, shoot
from dirac_spectra.numerics.quadrature import cumulative_inner, gram_matrix
from dirac_spectra.spectral import model
from dirac_spectra.spectral.glcore import PerturbedOperator, gl_residual

logger = logging.getLogger(__name__)

DEFAULT_RESIDUAL_TOL = 1e-6
DEFAULT_VERIFY_TOL = 1e-6
DEFAULT_WINDOW = 3.5

SCAN_X_MAX = 8.0
SCAN_RTOL = 1e-9
SCAN_DEPTH = 6.0
SCAN_LAMBDA_TOL = 1e-6
SCAN_SAMPLES = 384
MIN_SCAN_SAMPLES = 16
# Samples on either side used for the local background level
BACKGROUND_HALF_WIDTH = 12

# Scan window extends this far beyond the verification window
SCAN_MARGIN = 0.25
MATCH_TOL = 1e-4
ABSENCE_RADIUS = 0.3

GL_RESIDUAL_TOL = 1e-8
GL_RESIDUAL_PAIRS = 100
GL_RESIDUAL_X_MAX = 6.0


@dataclass(frozen=True, eq=False)
class ResidualReport:
    """Sup-norm of B y' + Omega y - lam y over the interior nodes."""

    sup_residual: float
    grid: Grid
    lam: float
    tolerance: float

    @property
    def passed(self) -> bool:
        """Whether the residual is within tolerance."""
        return self.sup_residual <= self.tolerance


def dirac_residual(
    potential: PotentialField,
    lam: float,
    y: VectorTrajectory,
    *,
    tol: float = DEFAULT_RESIDUAL_TOL,
) -> ResidualReport:
    """Residual of the Dirac system with fourth-order central differences.

    Raises:
        GridError: If the grid is not uniform or has fewer than 5 nodes
    """
    grid = y.grid
    step = grid.step
    if grid.size < 5:
        raise GridError(f"Residual needs at least 5 nodes, got {grid.size}")

    def derivative(values: FloatArray) -> FloatArray:
        return (values[:-4] - 8.0 * values[1:-3] + 8.0 * values[3:-1] - values[4:]) / (12.0 * step)

    xs = grid.nodes[2:-2]
    y1 = y.component1[2:-2]
    y2 = y.component2[2:-2]
    p = np.broadcast_to(np.asarray(potential.p(xs), dtype=np.float64), xs.shape)
    q = np.broadcast_to(np.asarray(potential.q(xs), dtype=np.float64), xs.shape)
    first = derivative(y.component2) + p * y1 + q * y2 - lam * y1
    second = -derivative(y.component1) + q * y1 - p * y2 - lam * y2
    sup = float(max(np.max(np.abs(first)), np.max(np.abs(second))))
    return ResidualReport(sup, grid, lam, tol)


def orthogonality_matrix(family: Sequence[VectorTrajectory]) -> NDArray[np.float64]:
    """Gram matrix of half-axis inner products.

    Raises:
        GridError: If the trajectories do not share a grid
    """
    return gram_matrix(list(family))


@dataclass(frozen=True, eq=False)
class SpectrumScan:
    """Miss-distance samples over a lambda range and the eigenvalues found."""

    lo: float
    hi: float
    lambdas: FloatArray
    miss_values: FloatArray
    detected: tuple[float, ...]
    depths: tuple[float, ...]

    def nearest(self, lam: float) -> float:
        """Distance from lam to the closest detected eigenvalue (inf if none)."""
        if not self.detected:
            return math.inf
        return min(abs(lam - found) for found in self.detected)


@dataclass(frozen=True)
class MissDistance:
    """lam -> log |psi(x_scan, lam)|."""

    potential: PotentialField
    alpha: Boundary | float
    x_scan: float
    rtol: float

    def __call__(self, lam: float) -> float:
        y1, y2 = shoot(
            self.potential, float(lam), self.alpha, self.x_scan, rtol=self.rtol, atol=DEFAULT_ATOL
        )
        return math.log(max(math.hypot(y1, y2), np.finfo(np.float64).tiny))


def spectrum_scan(
    potential: PotentialField,
    alpha: Boundary | float,
    lo: float,
    hi: float,
    samples: int = SCAN_SAMPLES,
    *,
    x_scan: float = SCAN_X_MAX,
    rtol: float = SCAN_RTOL,
    depth: float = SCAN_DEPTH,
    lambda_tol: float = SCAN_LAMBDA_TOL,
) -> SpectrumScan:
    """Locate eigenvalues in [lo, hi] by shooting.

    Interior local minima of the sampled miss distance are refined by bounded
    scalar minimization and kept when they lie at least `depth` below the
    median of the surrounding samples.

    Raises:
        GridError: If lo >= hi or samples < MIN_SCAN_SAMPLES
        CauchyTruncatedError: If an integration stops before x_scan
    """
    if not lo < hi:
        raise GridError(f"Scan range needs lo < hi, got lo={lo}, hi={hi}")
    if samples < MIN_SCAN_SAMPLES:
        raise GridError(f"Scan needs at least {MIN_SCAN_SAMPLES} samples, got {samples}")
    miss = MissDistance(potential, alpha, x_scan, rtol)
    lambdas = np.linspace(lo, hi, samples)
    values = np.array([miss(lam) for lam in lambdas])

    found: list[tuple[float, float]] = []
    for i in range(1, samples - 1):
        if not (values[i] < values[i - 1] and values[i] <= values[i + 1]):
            continue
        result = minimize_scalar(
            miss,
            bounds=(float(lambdas[i - 1]), float(lambdas[i + 1])),
            method="bounded",
            options={"xatol": lambda_tol},
        )
        window = values[max(0, i - BACKGROUND_HALF_WIDTH) : i + BACKGROUND_HALF_WIDTH + 1]
        background = float(np.median(window))
        drop = background - float(result.fun)
        logger.debug(
            "Scan minimum near %.6f refined to %.9f, depth %.2f", lambdas[i], result.x, drop
        )
        if drop >= depth and lo <= result.x <= hi:
            if found and abs(result.x - found[-1][0]) <= 10.0 * lambda_tol:
                if drop > found[-1][1]:
                    found[-1] = (float(result.x), drop)
                continue
            found.append((float(result.x), drop))

    logger.info(
        "Scan [%g, %g] with %d samples: %d eigenvalues %s",
        lo,
        hi,
        samples,
        len(found),
        [round(lam, 6) for lam, _ in found],
    )
    return SpectrumScan(
        lo,
        hi,
        lambdas,
        values,
        tuple(lam for lam, _ in found),
        tuple(drop for _, drop in found),
    )


def _label(index: EigenIndex) -> str:
    return f"k={index}" if isinstance(index, int) else f"mu={index:g}"


def verify_plan(
    op: PerturbedOperator,
    *,
    tol: float = DEFAULT_VERIFY_TOL,
    window: float = DEFAULT_WINDOW,
    potential: PotentialField | None = None,
    samples: int = SCAN_SAMPLES,
    x_scan: float = SCAN_X_MAX,
    scan_rtol: float = SCAN_RTOL,
    scan_depth: float = SCAN_DEPTH,
    lambda_tol: float = SCAN_LAMBDA_TOL,
) -> VerificationReport:
    """Run every check against a perturbed operator.

    Covers residuals, norming constants and boundary values of the
    eigenfunctions with |lambda| <= window, their orthogonality, the sign of
    det S, the integral-equation residual, and one shooting scan of the
    window compared against the prescribed spectrum.

    Args:
        op: Operator to verify
        tol: Tolerance for residuals, norming constants and orthogonality
        window: Half-width of the eigenvalue window
        potential: Potential to test instead of the operator's own (for
            replayed curves)
        samples: Scan samples
        x_scan: Scan endpoint
        scan_rtol: Integrator tolerance for the scan
        scan_depth: Minimum depth of an accepted scan minimum
        lambda_tol: Eigenvalue refinement tolerance

    Returns:
        Report; failures are entries, not exceptions
    """
    tested = potential if potential is not None else op.potential
    checks: list[CheckResult] = []
    bound = model.index_window(window + SCAN_MARGIN)
    data = op.spectral_data(-bound, bound)
    listed = [(index, point) for index, point in data if abs(point.eigenvalue) <= window]
    logger.info(
        "Verifying [%s]: %d eigenpairs in |lambda| <= %g", op.plan.describe(), len(listed), window
    )

    family: list[VectorTrajectory] = []
    constrained = op.bc.constrained_component
    for index, point in listed:
        label = _label(index)
        eigenfunction = op.eigenfunction(index)
        family.append(eigenfunction)
        magnitude = float(np.max(np.abs(eigenfunction.values)))
        residual = dirac_residual(
            tested, point.eigenvalue, eigenfunction, tol=tol * max(1.0, magnitude)
        )
        checks.append(
            CheckResult(
                name=f"residual[{label}]",
                passed=residual.passed,
                value=residual.sup_residual,
                tolerance=residual.tolerance,
            )
        )
        norm = cumulative_inner(eigenfunction, eigenfunction, op.grid).total
        relative = abs(norm - point.norming) / point.norming
        checks.append(
            CheckResult(
                name=f"norming[{label}]",
                passed=relative <= tol,
                value=relative,
                tolerance=tol,
                detail=f"squared norm {norm:.10g}, prescribed {point.norming:.10g}",
            )
        )
        at_origin = eigenfunction.origin()[constrained]
        checks.append(
            CheckResult(
                name=f"boundary[{label}]",
                passed=at_origin == 0.0,
                value=abs(at_origin),
                tolerance=0.0,
            )
        )

    if len(family) > 1:
        gram = orthogonality_matrix(family)
        diagonal = np.sqrt(np.abs(np.diag(gram)))
        normalized = np.abs(gram) / np.outer(diagonal, diagonal)
        np.fill_diagonal(normalized, 0.0)
        worst = float(np.max(normalized))
        checks.append(
            CheckResult(name="orthogonality", passed=worst <= tol, value=worst, tolerance=tol)
        )

    violations = op.determinant_violations
    checks.append(
        CheckResult(
            name="determinant",
            passed=violations.size == 0,
            value=float(np.min(op.determinants)),
            detail="" if violations.size == 0 else f"det S <= 0 at {violations.size} nodes, "
            f"first x={violations[0]:.6g}",
        )
    )

    rng = np.random.default_rng(0)
    x_limit = min(GL_RESIDUAL_X_MAX, op.grid.x_max)
    xs = rng.uniform(0.0, x_limit, GL_RESIDUAL_PAIRS)
    ys = xs * rng.uniform(0.0, 1.0, GL_RESIDUAL_PAIRS)
    worst_gl = max(
        (gl_residual(op, float(x), float(y)) for x, y in zip(xs, ys, strict=True)), default=0.0
    )
    checks.append(
        CheckResult(
            name="gl_residual",
            passed=worst_gl <= GL_RESIDUAL_TOL,
            value=worst_gl,
            tolerance=GL_RESIDUAL_TOL,
            detail=f"{GL_RESIDUAL_PAIRS} pairs with y <= x <= {x_limit:g}",
        )
    )

    lo, hi = -window - SCAN_MARGIN, window + SCAN_MARGIN
    scan = spectrum_scan(
        tested,
        op.bc,
        lo,
        hi,
        samples,
        x_scan=x_scan,
        rtol=scan_rtol,
        depth=scan_depth,
        lambda_tol=lambda_tol,
    )
    expected = [point.eigenvalue for _, point in data if lo < point.eigenvalue < hi]
    missing = [lam for lam in expected if scan.nearest(lam) > MATCH_TOL]
    extra = [
        found
        for found in scan.detected
        if min((abs(found - lam) for lam in expected), default=math.inf) > MATCH_TOL
    ]
    deviation = max((scan.nearest(lam) for lam in expected), default=0.0)
    detail_parts = []
    if missing:
        detail_parts.append("missing " + ", ".join(f"{lam:.6f}" for lam in missing))
    if extra:
        detail_parts.append("unexpected " + ", ".join(f"{lam:.6f}" for lam in extra))
    checks.append(
        CheckResult(
            name="scan",
            passed=not missing and not extra,
            value=deviation,
            tolerance=MATCH_TOL,
            detail="; ".join(detail_parts)
            or f"{len(scan.detected)} eigenvalues in [{lo:g}, {hi:g}]",
        )
    )

    for k in sorted(op.plan.removals):
        removed = model.half_axis_eigenvalue(k, op.bc)
        if not lo < removed < hi:
            continue
        distance = scan.nearest(removed)
        checks.append(
            CheckResult(
                name=f"absent[k={k}]",
                passed=distance > ABSENCE_RADIUS,
                value=distance,
                tolerance=ABSENCE_RADIUS,
                detail=f"removed eigenvalue {removed:.6f}",
            )
        )

    report = VerificationReport(
        plan=op.plan.describe(),
        boundary=op.bc.value,
        grid_max=op.grid.x_max,
        grid_step=op.grid.step,
        spectrum=[
            SpectralPointSchema(index=index, eigenvalue=point.eigenvalue, norming=point.norming)
            for index, point in listed
        ],
        checks=checks,
    )
    if report.passed:
        logger.info("All %d checks passed", len(checks))
    else:
        logger.warning(
            "%d of %d checks failed: %s",
            len(report.failures()),
            len(checks),
            ", ".join(check.name for check in report.failures()),
        )
    return report
