"""Tests for residuals, shooting scans and plan verification."""

import math

import numpy as np
import pytest

from dirac_spectra.errors import GridError
from dirac_spectra.models.grid import Grid, VectorTrajectory
from dirac_spectra.models.spectral import Boundary, PotentialField
from dirac_spectra.spectral.glcore import PerturbedOperator
from dirac_spectra.spectral.model import model_eigenfunction
from dirac_spectra.spectral.verify import (
    ResidualReport,
    SpectrumScan,
    dirac_residual,
    orthogonality_matrix,
    spectrum_scan,
    verify_plan,
)

MODEL = PotentialField.model()
SQRT2 = math.sqrt(2.0)


def _shifted(x: object) -> np.ndarray:
    return np.asarray(x, dtype=np.float64) + 0.5


def _zero(x: object) -> np.ndarray:
    return np.zeros_like(np.asarray(x, dtype=np.float64))


class TestDiracResidual:
    """Tests for the finite-difference residual."""

    def test_model_eigenfunction(self, grid: Grid) -> None:
        """Test V_2 solves the model system at lambda = 2 sqrt(2)."""
        v2 = model_eigenfunction(2, Boundary.ALPHA_0, grid)
        report = dirac_residual(MODEL, 2.0 * SQRT2, v2)
        assert report.passed, report.sup_residual
        assert report.lam == pytest.approx(2.0 * SQRT2)

    def test_wrong_eigenvalue(self, grid: Grid) -> None:
        """Test the residual detects a wrong spectral parameter."""
        v1 = model_eigenfunction(1, Boundary.ALPHA_0, grid)
        assert not dirac_residual(MODEL, 2.1, v1).passed

    def test_wrong_potential(self, grid: Grid) -> None:
        """Test the residual detects a shifted potential."""
        v1 = model_eigenfunction(1, Boundary.ALPHA_0, grid)
        shifted = PotentialField(p=_zero, q=_shifted)
        report = dirac_residual(shifted, 2.0, v1)
        assert report.sup_residual > 0.1

    def test_non_uniform_grid(self) -> None:
        """Test non-uniform grids are rejected."""
        uneven = Grid(np.array([0.0, 0.1, 0.3, 0.6, 1.0, 1.5]))
        with pytest.raises(GridError, match="not uniform"):
            dirac_residual(MODEL, 0.0, VectorTrajectory.zeros(uneven))

    def test_too_few_nodes(self) -> None:
        """Test the five-point stencil needs five nodes."""
        tiny = Grid.uniform(0.75, 0.25)
        with pytest.raises(GridError, match="at least 5 nodes"):
            dirac_residual(MODEL, 0.0, VectorTrajectory.zeros(tiny))

    def test_report_threshold(self, coarse_grid: Grid) -> None:
        """Test passed compares against the tolerance inclusively."""
        assert ResidualReport(1e-7, coarse_grid, 0.0, 1e-7).passed
        assert not ResidualReport(2e-7, coarse_grid, 0.0, 1e-7).passed


class TestOrthogonality:
    """Tests for Gram matrices of eigenfunction families."""

    def test_model_family(self, coarse_grid: Grid) -> None:
        """Test model eigenfunctions are orthogonal."""
        family = [model_eigenfunction(k, Boundary.ALPHA_0, coarse_grid) for k in range(-3, 4)]
        gram = orthogonality_matrix(family)
        diagonal = np.sqrt(np.diag(gram))
        normalized = np.abs(gram) / np.outer(diagonal, diagonal)
        np.fill_diagonal(normalized, 0.0)
        assert np.max(normalized) < 1e-9

    def test_perturbed_family(self, remove_and_add: PerturbedOperator) -> None:
        """Test the perturbed eigenfunctions stay orthogonal."""
        indices = [index for index, _ in remove_and_add.spectral_data(-2, 2)]
        family = [remove_and_add.eigenfunction(index) for index in indices]
        gram = orthogonality_matrix(family)
        diagonal = np.sqrt(np.diag(gram))
        normalized = np.abs(gram) / np.outer(diagonal, diagonal)
        np.fill_diagonal(normalized, 0.0)
        assert np.max(normalized) < 1e-6


class TestSpectrumScan:
    """Tests for shooting eigenvalue detection."""

    def test_model_positive_window(self) -> None:
        """Test [0.5, 3.5] holds 2, 2 sqrt(2) and 2 sqrt(3)."""
        scan = spectrum_scan(MODEL, Boundary.ALPHA_0, 0.5, 3.5)
        assert len(scan.detected) == 3
        for expected in (2.0, 2.0 * SQRT2, 2.0 * math.sqrt(3.0)):
            assert scan.nearest(expected) < 1e-4
        assert all(depth >= 6.0 for depth in scan.depths)

    def test_model_symmetric_window(self) -> None:
        """Test [-3.5, 3.5] holds seven eigenvalues including 0."""
        scan = spectrum_scan(MODEL, Boundary.ALPHA_0, -3.5, 3.5)
        assert len(scan.detected) == 7
        assert scan.nearest(0.0) < 1e-4
        assert scan.nearest(-2.0 * math.sqrt(3.0)) < 1e-4

    def test_gap_without_eigenvalues(self) -> None:
        """Test nothing is found in [0.1, 0.4]."""
        scan = spectrum_scan(MODEL, Boundary.ALPHA_0, 0.1, 0.4)
        assert scan.detected == ()
        assert scan.nearest(0.2) == math.inf

    def test_half_pi_model(self) -> None:
        """Test the pi/2 model has sqrt(2) and sqrt(6) in [0.5, 2.8]."""
        scan = spectrum_scan(MODEL, Boundary.ALPHA_HALF_PI, 0.5, 2.8)
        assert len(scan.detected) == 2
        assert scan.nearest(SQRT2) < 1e-4
        assert scan.nearest(math.sqrt(6.0)) < 1e-4

    def test_removed_eigenvalue_absent(self, remove_zero: PerturbedOperator) -> None:
        """Test no eigenvalue remains near 0 after removal."""
        scan = spectrum_scan(remove_zero.potential, Boundary.ALPHA_0, -0.5, 0.5)
        assert scan.detected == ()

    def test_added_eigenvalue_present(self, add_mu: PerturbedOperator) -> None:
        """Test [1, 2.5] holds the added 1.5 and the model 2."""
        scan = spectrum_scan(add_mu.potential, Boundary.ALPHA_0, 1.0, 2.5)
        assert len(scan.detected) == 2
        assert scan.nearest(1.5) < 1e-4
        assert scan.nearest(2.0) < 1e-4

    def test_samples_recorded(self) -> None:
        """Test the miss distance is kept for every sample."""
        scan = spectrum_scan(MODEL, Boundary.ALPHA_0, 1.5, 2.5, 64)
        assert isinstance(scan, SpectrumScan)
        assert scan.lambdas.shape == (64,)
        assert scan.miss_values.shape == (64,)
        assert np.all(np.isfinite(scan.miss_values))

    def test_invalid_range(self) -> None:
        """Test lo >= hi is rejected."""
        with pytest.raises(GridError, match="lo < hi"):
            spectrum_scan(MODEL, Boundary.ALPHA_0, 2.0, 1.0)

    def test_too_few_samples(self) -> None:
        """Test the sample floor."""
        with pytest.raises(GridError, match="at least 16 samples"):
            spectrum_scan(MODEL, Boundary.ALPHA_0, 0.0, 1.0, 8)


class TestVerifyPlan:
    """Tests for the full verification report."""

    def test_empty_plan_passes(self, empty_op: PerturbedOperator) -> None:
        """Test the model passes every check."""
        report = verify_plan(empty_op)
        assert report.passed, report.render()
        assert len(report.spectrum) == 7
        names = {check.name for check in report.checks}
        assert {"orthogonality", "determinant", "gl_residual", "scan"} <= names

    def test_removal_plan_passes(self, remove_zero_one: PerturbedOperator) -> None:
        """Test removing 0 and 2 passes, with both eigenvalues confirmed absent."""
        report = verify_plan(remove_zero_one)
        assert report.passed, report.render()
        names = [check.name for check in report.checks]
        assert "absent[k=0]" in names
        assert "absent[k=1]" in names
        assert "residual[k=0]" not in names

    def test_gl_residual_sample(self, remove_zero_one: PerturbedOperator) -> None:
        """Test the integral equation is checked at 100 pairs below 1e-8."""
        report = verify_plan(remove_zero_one, window=1.0)
        check = next(check for check in report.checks if check.name == "gl_residual")
        assert check.passed
        assert check.detail == "100 pairs with y <= x <= 6"
        assert check.value <= 1e-8

    def test_addition_plan_passes(self, remove_and_add: PerturbedOperator) -> None:
        """Test a replaced eigenvalue passes, labelled by its value."""
        report = verify_plan(remove_and_add)
        assert report.passed, report.render()
        assert "residual[mu=1.5]" in {check.name for check in report.checks}

    def test_wrong_potential_fails(self, empty_op: PerturbedOperator) -> None:
        """Test a shifted potential fails the residual checks."""
        shifted = PotentialField(p=_zero, q=_shifted, description="shifted")
        report = verify_plan(empty_op, potential=shifted)
        assert not report.passed
        failed = [check.name for check in report.failures()]
        assert any(name.startswith("residual[") for name in failed)
        assert "FAIL residual[" in report.render()

    def test_report_serializes(self, empty_op: PerturbedOperator) -> None:
        """Test the report dumps to JSON with its verdict."""
        report = verify_plan(empty_op, window=1.0)
        payload = report.model_dump(mode="json")
        assert payload["passed"] is True
        assert payload["boundary"] == "alpha0"
        assert payload["grid_step"] == pytest.approx(1.0 / 256.0)
