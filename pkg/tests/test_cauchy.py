"""Tests for the Cauchy problem solver."""

import logging
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dirac_spectra.errors import CauchyTruncatedError, GridError, SpectrumCollisionError
from dirac_spectra.models.grid import Grid
from dirac_spectra.models.spectral import Boundary, CauchyProblem, PotentialField
from dirac_spectra.numerics.cauchy import reference_solution_W, shoot, solve_cauchy
from dirac_spectra.spectral.model import half_axis_eigenvalue, model_eigenfunction
from dirac_spectra.spectral.verify import dirac_residual

MODEL = PotentialField.model()


def _problem(lam: float, alpha: Boundary | float = Boundary.ALPHA_0) -> CauchyProblem:
    return CauchyProblem(MODEL, lam, alpha)


class TestSolveCauchy:
    """Tests for integration across a grid."""

    def test_ground_state(self, short_grid: Grid) -> None:
        """Test lam = 0 reproduces (0, -exp(-x^2/2))."""
        y = solve_cauchy(_problem(0.0), short_grid)
        assert np.all(y.component1 == 0.0)
        assert_allclose(y.component2, -np.exp(-0.5 * short_grid.nodes**2), atol=1e-8)

    def test_reproduces_model_eigenfunctions(self, short_grid: Grid) -> None:
        """Test forward integration at lambda_k matches V_k for |k| <= 6."""
        for k in range(-6, 7):
            lam = half_axis_eigenvalue(k, Boundary.ALPHA_0)
            y = solve_cauchy(_problem(lam), short_grid, rtol=1e-12, atol=1e-15)
            expected = model_eigenfunction(k, Boundary.ALPHA_0, short_grid)
            scale = max(1.0, float(np.max(np.abs(expected.values))))
            assert np.max(np.abs(y.values - expected.values)) < 1e-8 * scale

    def test_initial_value_is_exact(self, short_grid: Grid) -> None:
        """Test the node at 0 holds the Cauchy data bit for bit."""
        assert solve_cauchy(_problem(0.7), short_grid).origin() == (0.0, -1.0)
        assert solve_cauchy(_problem(0.7, Boundary.ALPHA_HALF_PI), short_grid).origin() == (
            1.0,
            0.0,
        )

    def test_general_alpha(self, short_grid: Grid) -> None:
        """Test a real alpha starts at (sin alpha, -cos alpha)."""
        y = solve_cauchy(_problem(0.4, 0.3), short_grid)
        assert y.origin() == (math.sin(0.3), -math.cos(0.3))

    def test_dense_output(self, short_grid: Grid) -> None:
        """Test the evaluator agrees with the node samples."""
        y = solve_cauchy(_problem(1.1), short_grid)
        assert_allclose(y.at(short_grid.nodes[1:]), y.values[:, 1:], rtol=1e-12, atol=1e-14)

    def test_wronskian_is_constant(self, short_grid: Grid) -> None:
        """Test y1 z2 - y2 z1 stays 1 for the two model boundary solutions."""
        y = solve_cauchy(_problem(0.7), short_grid, rtol=1e-12, atol=1e-15)
        z = solve_cauchy(_problem(0.7, Boundary.ALPHA_HALF_PI), short_grid, rtol=1e-12, atol=1e-15)
        wronskian = y.component1 * z.component2 - y.component2 * z.component1
        scale = np.maximum(1.0, np.hypot(*y.values) * np.hypot(*z.values))
        assert np.max(np.abs(wronskian - 1.0) / scale) < 1e-9

    def test_rejects_grid_away_from_origin(self) -> None:
        """Test a grid must start at 0."""
        with pytest.raises(GridError, match="start at x = 0"):
            solve_cauchy(_problem(1.0), Grid.uniform(3.0, 1.0 / 16.0, x_min=1.0))

    def test_truncation_warns(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test a growing solution is cut at the overflow guard."""
        far = Grid.uniform(40.0, 1.0 / 16.0)
        with caplog.at_level(logging.WARNING, logger="dirac_spectra.numerics.cauchy"):
            y = solve_cauchy(_problem(1.0), far)
        assert y.truncated_at is not None
        assert 20.0 < y.truncated_at < 40.0
        assert y.grid.x_max <= y.truncated_at
        assert "stopped at" in caplog.text

    def test_truncation_strict(self) -> None:
        """Test strict mode raises with the stopping point."""
        far = Grid.uniform(40.0, 1.0 / 16.0)
        with pytest.raises(CauchyTruncatedError) as excinfo:
            solve_cauchy(_problem(1.0), far, strict=True)
        assert 20.0 < excinfo.value.x < 40.0

    def test_no_truncation_on_default_span(self, short_grid: Grid) -> None:
        """Test a short grid is fully covered."""
        assert solve_cauchy(_problem(1.0), short_grid).truncated_at is None


class TestShoot:
    """Tests for single endpoint evaluation."""

    def test_non_eigenvalue_grows(self) -> None:
        """Test the solution at lam = 1 blows up by x = 8."""
        y1, y2 = shoot(MODEL, 1.0, Boundary.ALPHA_0, 8.0)
        assert math.hypot(y1, y2) > 1e3

    def test_matches_solve_cauchy(self, short_grid: Grid) -> None:
        """Test the endpoint agrees with grid integration."""
        y = solve_cauchy(_problem(0.9), short_grid)
        end = shoot(MODEL, 0.9, Boundary.ALPHA_0, 3.0)
        assert end == pytest.approx((y.component1[-1], y.component2[-1]), rel=1e-8)

    def test_truncation_raises(self) -> None:
        """Test shooting past the overflow guard raises."""
        with pytest.raises(CauchyTruncatedError, match="lam=1"):
            shoot(MODEL, 1.0, Boundary.ALPHA_0, 40.0)


class TestReferenceSolution:
    """Tests for the sources of added eigenvalues."""

    def test_origin(self, short_grid: Grid) -> None:
        """Test W(0) = (0, -1)."""
        w = reference_solution_W(1.5, short_grid)
        assert w.origin() == (0.0, -1.0)

    def test_solves_model_system(self, short_grid: Grid) -> None:
        """Test W satisfies the model equation at mu."""
        w = reference_solution_W(1.5, short_grid, rtol=1e-12, atol=1e-15)
        magnitude = float(np.max(np.abs(w.values)))
        report = dirac_residual(MODEL, 1.5, w, tol=1e-7 * max(1.0, magnitude))
        assert report.passed, report.sup_residual

    def test_half_pi_boundary(self, short_grid: Grid) -> None:
        """Test the pi/2 reference solution starts at (1, 0)."""
        w = reference_solution_W(0.5, short_grid, Boundary.ALPHA_HALF_PI)
        assert w.origin() == (1.0, 0.0)

    def test_collision(self, short_grid: Grid) -> None:
        """Test mu equal to a model eigenvalue is rejected."""
        with pytest.raises(SpectrumCollisionError, match="mu=2.0"):
            reference_solution_W(2.0, short_grid)
        with pytest.raises(SpectrumCollisionError):
            reference_solution_W(math.sqrt(2.0), short_grid, Boundary.ALPHA_HALF_PI)
