"""Perturbation plans: finite changes applied to a model spectrum."""

import math
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from types import MappingProxyType

from dirac_spectra.errors import PlanValidationError
from dirac_spectra.models.spectral import Boundary

# Model indices address surviving or rescaled model eigenvalues; floats
# address added eigenvalues by their value
EigenIndex = int | float

# Rescalings closer than this (relative) to the current norming are no-ops
NORMING_RTOL = 1e-12

MU_TOL = 1e-9


@dataclass(frozen=True)
class Addition:
    """A new eigenvalue mu with norming constant c."""

    mu: float
    norming: float


@dataclass(frozen=True)
class PerturbationPlan:
    """Removals, rescalings and additions relative to a model operator.

    Construction checks the structural invariants. `validated()` additionally
    compares rescalings with the model norming constants.
    """

    bc: Boundary = Boundary.ALPHA_0
    removals: frozenset[int] = frozenset()
    rescalings: Mapping[int, float] = field(default_factory=dict)
    additions: tuple[Addition, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.bc, Boundary):
            raise PlanValidationError(f"Unsupported plan boundary: {self.bc!r}")
        object.__setattr__(self, "removals", frozenset(int(k) for k in self.removals))
        rescalings = {int(k): float(b) for k, b in self.rescalings.items()}
        object.__setattr__(self, "rescalings", MappingProxyType(dict(sorted(rescalings.items()))))
        object.__setattr__(self, "additions", tuple(self.additions))

        overlap = self.removals & set(self.rescalings)
        if overlap:
            raise PlanValidationError(
                f"Indices both removed and rescaled: {sorted(overlap)}"
            )
        for k, b in self.rescalings.items():
            if not (math.isfinite(b) and b > 0):
                raise PlanValidationError(f"Rescaled norming for k={k} must be positive, got {b}")
        self._check_additions()

    def _check_additions(self) -> None:
        # Local import: the model module depends on this package
        from dirac_spectra.spectral.model import nearest_model_eigenvalue

        seen: list[float] = []
        for addition in self.additions:
            if not math.isfinite(addition.mu):
                raise PlanValidationError(f"Added eigenvalue must be finite, got {addition.mu}")
            if not (math.isfinite(addition.norming) and addition.norming > 0):
                raise PlanValidationError(
                    f"Norming for mu={addition.mu} must be positive, got {addition.norming}"
                )
            if any(abs(addition.mu - other) <= MU_TOL for other in seen):
                raise PlanValidationError(f"Added eigenvalue mu={addition.mu} is listed twice")
            nearest = nearest_model_eigenvalue(addition.mu, self.bc)
            if abs(addition.mu - nearest) <= MU_TOL:
                raise PlanValidationError(
                    f"Added eigenvalue mu={addition.mu} coincides with model eigenvalue "
                    f"{nearest:.10g}"
                )
            seen.append(addition.mu)

    @classmethod
    def build(
        cls,
        bc: Boundary = Boundary.ALPHA_0,
        remove: Iterable[int] = (),
        rescale: Mapping[int, float] | None = None,
        add: Iterable[tuple[float, float]] = (),
    ) -> "PerturbationPlan":
        """Convenience constructor from plain values."""
        return cls(
            bc=bc,
            removals=frozenset(remove),
            rescalings=dict(rescale or {}),
            additions=tuple(Addition(float(mu), float(c)) for mu, c in add),
        )

    @property
    def is_empty(self) -> bool:
        """Whether the plan changes nothing."""
        return not (self.removals or self.rescalings or self.additions)

    def check_rescalings(self, current: Callable[[int], float]) -> None:
        """Reject rescalings that leave the current norming unchanged.

        Args:
            current: Norming constant of index k before the plan applies

        Raises:
            PlanValidationError: If some b equals the current norming
        """
        for k, b in self.rescalings.items():
            a = current(k)
            if math.isclose(b, a, rel_tol=NORMING_RTOL, abs_tol=0.0):
                raise PlanValidationError(
                    f"Rescaling k={k} to b={b} equals the current norming constant {a}"
                )

    def validated(self) -> "PerturbationPlan":
        """Return self after checking rescalings against the model norming constants."""
        from dirac_spectra.spectral.model import norming_constant

        self.check_rescalings(lambda k: norming_constant(k, self.bc).norming)
        return self

    def find_addition(self, mu: float) -> int | None:
        """Position of the addition at mu, if any."""
        for position, addition in enumerate(self.additions):
            if abs(addition.mu - mu) <= MU_TOL:
                return position
        return None

    def describe(self) -> str:
        """One-line human-readable summary."""
        parts = [self.bc.value]
        if self.removals:
            parts.append("remove " + ",".join(str(k) for k in sorted(self.removals)))
        if self.rescalings:
            parts.append(
                "rescale " + ",".join(f"{k}->{b:g}" for k, b in self.rescalings.items())
            )
        if self.additions:
            parts.append(
                "add " + ",".join(f"({a.mu:g},{a.norming:g})" for a in self.additions)
            )
        return "; ".join(parts)
