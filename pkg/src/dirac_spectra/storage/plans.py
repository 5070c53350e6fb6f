"""Plan documents: strict JSON schema for perturbation plans."""

import logging
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from dirac_spectra.errors import PlanValidationError
from dirac_spectra.models.grid import Grid
from dirac_spectra.models.plan import Addition, PerturbationPlan
from dirac_spectra.models.report import SpectralPointSchema
from dirac_spectra.models.spectral import Boundary
from dirac_spectra.spectral.glcore import PerturbedOperator

logger = logging.getLogger(__name__)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RescaleEntry(_Strict):
    """New norming constant b for model index k."""

    k: int
    b: float = Field(gt=0, allow_inf_nan=False)


class AddEntry(_Strict):
    """Added eigenvalue mu with norming constant c."""

    mu: float = Field(allow_inf_nan=False)
    c: float = Field(gt=0, allow_inf_nan=False)


class GridSpec(_Strict):
    """Uniform half-axis grid."""

    x_max: float = Field(gt=0, allow_inf_nan=False)
    step: float = Field(gt=0, allow_inf_nan=False)

    def build(self) -> Grid:
        """Materialize the grid."""
        return Grid.uniform(self.x_max, self.step)


class PlanDocument(_Strict):
    """Perturbation plan as stored on disk. Unknown fields are rejected."""

    boundary: Literal["alpha0", "alphaPiOver2"] = "alpha0"
    remove: list[int] = Field(default_factory=list)
    rescale: list[RescaleEntry] = Field(default_factory=list)
    add: list[AddEntry] = Field(default_factory=list)
    grid: GridSpec | None = None

    def to_plan(self) -> PerturbationPlan:
        """Convert to a validated plan.

        Raises:
            PlanValidationError: If the plan violates its invariants
        """
        if len(set(self.remove)) != len(self.remove):
            raise PlanValidationError(f"Duplicate removal indices in {self.remove}")
        indices = [entry.k for entry in self.rescale]
        if len(set(indices)) != len(indices):
            raise PlanValidationError(f"Duplicate rescaling indices in {indices}")
        plan = PerturbationPlan(
            bc=Boundary(self.boundary),
            removals=frozenset(self.remove),
            rescalings={entry.k: entry.b for entry in self.rescale},
            additions=tuple(Addition(entry.mu, entry.c) for entry in self.add),
        )
        return plan.validated()

    @classmethod
    def from_plan(cls, plan: PerturbationPlan, grid: Grid | None = None) -> "PlanDocument":
        """Normalized document for a plan."""
        return cls(
            boundary=plan.bc.value,
            remove=sorted(plan.removals),
            rescale=[RescaleEntry(k=k, b=b) for k, b in plan.rescalings.items()],
            add=[AddEntry(mu=a.mu, c=a.norming) for a in plan.additions],
            grid=None if grid is None else GridSpec(x_max=grid.x_max, step=grid.step),
        )


class PlanEcho(BaseModel):
    """Normalized plan plus the resolved post-perturbation spectrum."""

    plan: PlanDocument
    spectrum: list[SpectralPointSchema]


def load_plan(path: Path) -> PlanDocument:
    """Read and schema-check a plan file.

    Raises:
        PlanValidationError: If the file cannot be read or fails the schema
    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise PlanValidationError(f"Cannot read plan file {path}: {e}") from e
    try:
        document = PlanDocument.model_validate_json(text)
    except ValidationError as e:
        raise PlanValidationError(f"Invalid plan file {path}: {e}") from e
    logger.debug("Loaded plan %s: %s", path, document.model_dump())
    return document


def plan_echo(op: PerturbedOperator, k_min: int, k_max: int) -> PlanEcho:
    """Echo of a synthesized plan with its spectrum over a model index window."""
    return PlanEcho(
        plan=PlanDocument.from_plan(op.plan, op.grid),
        spectrum=[
            SpectralPointSchema(index=index, eigenvalue=point.eigenvalue, norming=point.norming)
            for index, point in op.spectral_data(k_min, k_max)
        ],
    )
