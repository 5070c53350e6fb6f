"""Pydantic schemas for verification reports."""

from pydantic import BaseModel, ConfigDict, Field, computed_field

from dirac_spectra import __version__


class SpectralPointSchema(BaseModel):
    """One indexed eigenvalue with its norming constant."""

    model_config = ConfigDict(from_attributes=True)

    index: int | float
    eigenvalue: float
    norming: float


class CheckResult(BaseModel):
    """Outcome of one verification check."""

    name: str
    passed: bool
    value: float | None = None
    tolerance: float | None = None
    detail: str = ""


class VerificationReport(BaseModel):
    """All checks run against one perturbed operator."""

    plan: str
    boundary: str
    grid_max: float
    grid_step: float
    spectrum: list[SpectralPointSchema] = Field(default_factory=list)
    checks: list[CheckResult] = Field(default_factory=list)
    version: str = __version__

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        """Whether every check passed."""
        return all(check.passed for check in self.checks)

    def failures(self) -> list[CheckResult]:
        """Checks that did not pass."""
        return [check for check in self.checks if not check.passed]

    def render(self) -> str:
        """Plain-text rendering, one check per line."""
        lines = [
            f"plan: {self.plan}",
            f"grid: [0, {self.grid_max:g}] step {self.grid_step:g}",
        ]
        for check in self.checks:
            status = "PASS" if check.passed else "FAIL"
            value = "" if check.value is None else f" value={check.value:.3e}"
            tolerance = "" if check.tolerance is None else f" tol={check.tolerance:.1e}"
            detail = f" ({check.detail})" if check.detail else ""
            lines.append(f"{status} {check.name}{value}{tolerance}{detail}")
        failed = len(self.failures())
        lines.append(
            f"{len(self.checks) - failed}/{len(self.checks)} checks passed"
            + ("" if failed == 0 else f", {failed} failed")
        )
        return "\n".join(lines)
