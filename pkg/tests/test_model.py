"""Tests for the closed-form spectral data of the model operators."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dirac_spectra.errors import UnsortedSpectrumError, UnsupportedBoundaryError
from dirac_spectra.models.grid import Grid
from dirac_spectra.models.spectral import Boundary, SpectralPoint
from dirac_spectra.numerics.hermite import phi
from dirac_spectra.numerics.quadrature import cumulative_inner
from dirac_spectra.spectral.model import (
    half_axis_eigenvalue,
    index_window,
    model_eigenfunction,
    model_spectral_points,
    nearest_model_eigenvalue,
    norming_constant,
    oscillator_residual,
    spectral_function,
    whole_axis_eigenfunction,
    whole_axis_eigenvalue,
    whole_axis_index,
    whole_axis_residual,
)

SQRT_PI = math.sqrt(math.pi)
SCAN = np.linspace(-6.0, 6.0, 241)


class TestWholeAxis:
    """Tests for the whole-axis eigenpairs U_n."""

    def test_eigenvalues(self) -> None:
        """Test lambda_n = sign(n) sqrt(2|n|)."""
        assert whole_axis_eigenvalue(0) == 0.0
        assert whole_axis_eigenvalue(1) == pytest.approx(1.4142136, abs=1e-7)
        assert whole_axis_eigenvalue(-3) == pytest.approx(-2.4494897, abs=1e-7)

    def test_ground_state(self, coarse_grid: Grid) -> None:
        """Test U_0 = (0, phi_0)."""
        u0 = whole_axis_eigenfunction(0, coarse_grid)
        assert np.all(u0.component1 == 0.0)
        assert_allclose(u0.component2, phi(0, coarse_grid.nodes), rtol=1e-15)

    def test_positive_index(self, coarse_grid: Grid) -> None:
        """Test U_2 = (phi_1, phi_2)."""
        u2 = whole_axis_eigenfunction(2, coarse_grid)
        assert_allclose(u2.component1, phi(1, coarse_grid.nodes), rtol=1e-14)
        assert_allclose(u2.component2, phi(2, coarse_grid.nodes), rtol=1e-14)

    def test_negative_index(self, coarse_grid: Grid) -> None:
        """Test U_{-2} = (-phi_1, phi_2)."""
        u = whole_axis_eigenfunction(-2, coarse_grid)
        assert_allclose(u.component1, -phi(1, coarse_grid.nodes), rtol=1e-14)
        assert_allclose(u.component2, phi(2, coarse_grid.nodes), rtol=1e-14)

    def test_eigen_residual(self) -> None:
        """Test B U_n' + Omega_0 U_n = lambda_n U_n for |n| <= 10."""
        for n in range(-10, 11):
            assert whole_axis_residual(n, SCAN) < 1e-8

    def test_oscillator_residuals(self) -> None:
        """Test both components solve their decoupled oscillator equations."""
        for n in range(-10, 11):
            first, second = oscillator_residual(n, SCAN)
            assert first < 1e-8
            assert second < 1e-8


class TestHalfAxis:
    """Tests for the half-axis model operators."""

    def test_eigenvalues(self) -> None:
        """Test the closed forms for both boundary conditions."""
        assert half_axis_eigenvalue(1, Boundary.ALPHA_0) == pytest.approx(2.0)
        assert half_axis_eigenvalue(0, Boundary.ALPHA_0) == 0.0
        assert half_axis_eigenvalue(0, Boundary.ALPHA_HALF_PI) == pytest.approx(math.sqrt(2.0))
        assert half_axis_eigenvalue(-1, Boundary.ALPHA_HALF_PI) == pytest.approx(-math.sqrt(2.0))

    def test_whole_axis_index(self) -> None:
        """Test the even and odd members are selected."""
        assert whole_axis_index(3, Boundary.ALPHA_0) == 6
        assert whole_axis_index(3, Boundary.ALPHA_HALF_PI) == 7
        assert whole_axis_index(-1, Boundary.ALPHA_HALF_PI) == -1

    def test_general_alpha_rejected(self) -> None:
        """Test a plain real alpha has no closed-form data."""
        with pytest.raises(UnsupportedBoundaryError, match="alpha=0.3"):
            half_axis_eigenvalue(1, 0.3)
        with pytest.raises(UnsupportedBoundaryError):
            norming_constant(0, 0.3)

    def test_ground_eigenfunction(self, coarse_grid: Grid) -> None:
        """Test V_0 = (0, -exp(-x^2/2))."""
        v0 = model_eigenfunction(0, Boundary.ALPHA_0, coarse_grid)
        assert np.all(v0.component1 == 0.0)
        assert_allclose(v0.component2, -np.exp(-0.5 * coarse_grid.nodes**2), rtol=1e-12)

    def test_cauchy_data_alpha0(self, coarse_grid: Grid) -> None:
        """Test V_k(0) = (0, -1) with the first component exactly zero."""
        for k in range(-8, 9):
            y1, y2 = model_eigenfunction(k, Boundary.ALPHA_0, coarse_grid).origin()
            assert y1 == 0.0
            assert y2 == pytest.approx(-1.0, abs=1e-15)

    def test_cauchy_data_half_pi(self, coarse_grid: Grid) -> None:
        """Test the pi/2 eigenfunctions start at (1, 0)."""
        for k in range(-8, 9):
            y1, y2 = model_eigenfunction(k, Boundary.ALPHA_HALF_PI, coarse_grid).origin()
            assert y1 == pytest.approx(1.0, abs=1e-15)
            assert y2 == 0.0

    def test_norming_closed_forms(self) -> None:
        """Test a_0 = sqrt(pi)/2 and a_2 = (8/3) sqrt(pi)."""
        assert norming_constant(0, Boundary.ALPHA_0).norming == pytest.approx(0.8862269, abs=1e-7)
        for k in (2, -2):
            point = norming_constant(k, Boundary.ALPHA_0)
            assert point.norming == pytest.approx(8.0 / 3.0 * SQRT_PI, rel=1e-14)
            assert point.norming == pytest.approx(4.7265703, abs=1e-7)

    def test_norming_matches_quadrature(self, coarse_grid: Grid) -> None:
        """Test closed-form norming equals the squared norm of V_k for |k| <= 8."""
        for k in range(-8, 9):
            v = model_eigenfunction(k, Boundary.ALPHA_0, coarse_grid)
            norm = cumulative_inner(v, v, coarse_grid).total
            assert norm == pytest.approx(norming_constant(k, Boundary.ALPHA_0).norming, rel=1e-8)

    def test_half_pi_norming_is_own_norm(self, coarse_grid: Grid) -> None:
        """Test the pi/2 norming constants are the squared norms of their eigenfunctions."""
        for k in (-2, 0, 3):
            v = model_eigenfunction(k, Boundary.ALPHA_HALF_PI, coarse_grid)
            norm = cumulative_inner(v, v, coarse_grid).total
            point = norming_constant(k, Boundary.ALPHA_HALF_PI)
            assert point.norming == pytest.approx(norm, rel=1e-10)

    def test_half_pi_ground_norming(self) -> None:
        """Test the k=0 pi/2 norming constant is sqrt(pi)."""
        # V = U_1 / phi_0(0) and U_1 has unit norm on the half axis
        point = norming_constant(0, Boundary.ALPHA_HALF_PI)
        assert point.eigenvalue == pytest.approx(1.4142136, abs=1e-7)
        assert point.norming == pytest.approx(SQRT_PI, rel=1e-10)

    def test_symmetry(self) -> None:
        """Test lambda_{-k} = -lambda_k and a_{-k} = a_k."""
        for k in range(1, 9):
            plus = norming_constant(k, Boundary.ALPHA_0)
            minus = norming_constant(-k, Boundary.ALPHA_0)
            assert minus.eigenvalue == -plus.eigenvalue
            assert minus.norming == plus.norming

    def test_spectral_points_sorted(self) -> None:
        """Test a model window is sorted by eigenvalue."""
        points = model_spectral_points(Boundary.ALPHA_0, -3, 3)
        eigenvalues = [point.eigenvalue for point in points]
        assert eigenvalues == sorted(eigenvalues)
        assert len(points) == 7

    def test_spectral_points_empty_window(self) -> None:
        """Test k_min > k_max is rejected."""
        with pytest.raises(ValueError, match="Empty index window"):
            model_spectral_points(Boundary.ALPHA_0, 2, 1)

    def test_nearest_model_eigenvalue(self) -> None:
        """Test the closest eigenvalue of each family is found."""
        assert nearest_model_eigenvalue(1.9, Boundary.ALPHA_0) == pytest.approx(2.0)
        expected = -2.0 * math.sqrt(2.0)
        assert nearest_model_eigenvalue(-2.7, Boundary.ALPHA_0) == pytest.approx(expected)
        assert nearest_model_eigenvalue(1.5, Boundary.ALPHA_HALF_PI) == pytest.approx(math.sqrt(2))
        assert nearest_model_eigenvalue(0.1, Boundary.ALPHA_0) == 0.0

    def test_index_window(self) -> None:
        """Test the window bound covers every eigenvalue up to |lambda|."""
        bound = index_window(3.5)
        assert bound == 8
        assert half_axis_eigenvalue(bound, Boundary.ALPHA_0) > 3.5
        assert half_axis_eigenvalue(bound - 1, Boundary.ALPHA_HALF_PI) > 3.5


class TestSpectralFunction:
    """Tests for the spectral step function."""

    @pytest.fixture
    def points(self) -> list[SpectralPoint]:
        """Model alpha0 points for |k| <= 4."""
        return model_spectral_points(Boundary.ALPHA_0, -4, 4)

    def test_zero_at_origin(self, points: list[SpectralPoint]) -> None:
        """Test rho(0) = 0."""
        assert spectral_function(0.0, points) == 0.0

    def test_positive_argument(self, points: list[SpectralPoint]) -> None:
        """Test only lambda_1 = 2 contributes on (0, 2.5]."""
        assert spectral_function(2.5, points) == pytest.approx(1.0 / (2.0 * SQRT_PI))
        assert spectral_function(2.5, points) == pytest.approx(0.2820948, abs=1e-7)

    def test_negative_argument_includes_origin(self, points: list[SpectralPoint]) -> None:
        """Test rho(-2.5) = -(1/a_{-1} + 1/a_0)."""
        expected = -(1.0 / (2.0 * SQRT_PI) + 2.0 / SQRT_PI)
        assert spectral_function(-2.5, points) == pytest.approx(expected)

    def test_jump_attained_at_eigenvalue(self, points: list[SpectralPoint]) -> None:
        """Test the jump at lambda_1 is counted at lambda_1 but not just below."""
        assert spectral_function(2.0, points) == pytest.approx(1.0 / (2.0 * SQRT_PI))
        assert spectral_function(2.0 - 1e-12, points) == 0.0

    def test_unsorted_rejected(self) -> None:
        """Test unsorted points are rejected."""
        points = [SpectralPoint(2.0, 1.0), SpectralPoint(0.0, 1.0)]
        with pytest.raises(UnsortedSpectrumError):
            spectral_function(1.0, points)

    def test_non_positive_norming_rejected(self) -> None:
        """Test a spectral point needs a positive norming constant."""
        with pytest.raises(ValueError, match="positive"):
            SpectralPoint(1.0, 0.0)
