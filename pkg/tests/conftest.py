"""Shared test fixtures."""

from collections.abc import Iterator

import pytest

from dirac_spectra.config import get_settings
from dirac_spectra.models.grid import Grid
from dirac_spectra.models.plan import PerturbationPlan
from dirac_spectra.models.spectral import Boundary
from dirac_spectra.spectral.glcore import PerturbedOperator, synthesize

GRID_MAX = 12.0
GRID_STEP = 1.0 / 256.0


@pytest.fixture(autouse=True)
def fresh_settings() -> Iterator[None]:
    """Drop cached settings so environment changes take effect."""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture(scope="session")
def grid() -> Grid:
    """Default half-axis grid [0, 12] with step 1/256."""
    return Grid.uniform(GRID_MAX, GRID_STEP)


@pytest.fixture(scope="session")
def coarse_grid() -> Grid:
    """Grid [0, 12] with step 1/16 for quadrature-only checks."""
    return Grid.uniform(GRID_MAX, 1.0 / 16.0)


@pytest.fixture(scope="session")
def short_grid() -> Grid:
    """Grid [0, 3] with step 1/256 for forward-shooting comparisons."""
    return Grid.uniform(3.0, GRID_STEP)


@pytest.fixture(scope="session")
def empty_op(grid: Grid) -> PerturbedOperator:
    """The unperturbed alpha0 model."""
    return synthesize(PerturbationPlan(), grid)


@pytest.fixture(scope="session")
def remove_zero(grid: Grid) -> PerturbedOperator:
    """Model with the eigenvalue 0 removed."""
    return synthesize(PerturbationPlan.build(remove=[0]), grid)


@pytest.fixture(scope="session")
def remove_zero_one(grid: Grid) -> PerturbedOperator:
    """Model with the eigenvalues 0 and 2 removed."""
    return synthesize(PerturbationPlan.build(remove=[0, 1]), grid)


@pytest.fixture(scope="session")
def rescale_one(grid: Grid) -> PerturbedOperator:
    """Model with the norming constant of k=1 set to 5."""
    return synthesize(PerturbationPlan.build(rescale={1: 5.0}), grid)


@pytest.fixture(scope="session")
def add_mu(grid: Grid) -> PerturbedOperator:
    """Model with eigenvalue 1.5 added, norming constant 2."""
    return synthesize(PerturbationPlan.build(add=[(1.5, 2.0)]), grid)


@pytest.fixture(scope="session")
def remove_and_add(grid: Grid) -> PerturbedOperator:
    """Model with eigenvalue 2 replaced by 1.5."""
    return synthesize(PerturbationPlan.build(remove=[1], add=[(1.5, 2.0)]), grid)


@pytest.fixture(scope="session")
def half_pi_remove(grid: Grid) -> PerturbedOperator:
    """alpha = pi/2 model with its k=0 eigenvalue removed."""
    return synthesize(PerturbationPlan.build(Boundary.ALPHA_HALF_PI, remove=[0]), grid)


@pytest.fixture(scope="session")
def standard_ops(
    remove_zero: PerturbedOperator,
    remove_zero_one: PerturbedOperator,
    rescale_one: PerturbedOperator,
    add_mu: PerturbedOperator,
    remove_and_add: PerturbedOperator,
) -> dict[str, PerturbedOperator]:
    """Every standard alpha0 plan by name."""
    return {
        "remove_zero": remove_zero,
        "remove_zero_one": remove_zero_one,
        "rescale_one": rescale_one,
        "add_mu": add_mu,
        "remove_and_add": remove_and_add,
    }
