"""Exception hierarchy for dirac-spectra."""


class DiracSpectraError(Exception):
    """Base class for all library errors."""


class HermiteOrderError(DiracSpectraError, ValueError):
    """Raw Hermite polynomial requested beyond the representable order."""


class GridError(DiracSpectraError, ValueError):
    """Invalid grid, or trajectories sampled on different grids."""


class QuadratureError(DiracSpectraError, RuntimeError):
    """Adaptive quadrature hit its subdivision limit above tolerance."""


class UnsupportedBoundaryError(DiracSpectraError, ValueError):
    """Closed-form spectral data requested for a non-model boundary parameter."""


class UnsortedSpectrumError(DiracSpectraError, ValueError):
    """Spectral points are not sorted by eigenvalue."""


class SpectrumCollisionError(DiracSpectraError, ValueError):
    """An added eigenvalue coincides with an existing one."""


class PlanValidationError(DiracSpectraError, ValueError):
    """A perturbation plan violates its invariants."""


class CompositionError(DiracSpectraError, ValueError):
    """A plan cannot be composed with the given base operator."""


class CurveFormatError(DiracSpectraError, ValueError):
    """A curve file does not have the expected columns."""


class RemovedIndexError(DiracSpectraError, KeyError):
    """Eigenfunction requested for an eigenvalue the plan removes or never had."""

    def __str__(self) -> str:
        # KeyError quotes its argument; keep the plain message
        return str(self.args[0]) if self.args else ""


class CauchyTruncatedError(DiracSpectraError, RuntimeError):
    """Integration stopped before the end of the grid."""

    def __init__(self, message: str, x: float) -> None:
        super().__init__(message)
        self.x = x


class SingularSystemError(DiracSpectraError, RuntimeError):
    """The Gel'fand-Levitan system is numerically singular at x."""

    def __init__(self, message: str, x: float) -> None:
        super().__init__(message)
        self.x = x


class CrossPathMismatchError(DiracSpectraError, RuntimeError):
    """LU and Cramer evaluations of the potential disagree at x."""

    def __init__(self, message: str, x: float) -> None:
        super().__init__(message)
        self.x = x
