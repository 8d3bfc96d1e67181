"""Exception types shared across the package."""


class HillSpecError(Exception):
    """Base class for computational failures in this package."""


class DomainError(HillSpecError, ValueError):
    """An argument violates a documented precondition."""


class PoleError(DomainError):
    """Gamma evaluated at a non-positive integer."""


class BranchCutError(DomainError):
    """Argument on the excluded branch cut (negative real axis)."""


class IntegerOrderError(DomainError):
    """Bessel Y requested at integer order, which is not supported."""


class ConvergenceError(HillSpecError):
    """A series or iteration hit its budget before reaching tolerance."""


class StepSizeError(HillSpecError):
    """Adaptive integrator step size underflowed."""

    def __init__(self, message: str, location: float):
        super().__init__(f"{message} (at x = {location:.6g})")
        self.location = location


class SpectrumProximityError(HillSpecError):
    """Requested a resolvent quantity too close to the spectrum."""


class BoundaryZeroError(HillSpecError):
    """A zero persists on the search-box boundary after perturbations."""


class WindingError(HillSpecError):
    """Contour quadrature failed to settle on an integer winding number."""


class CountMismatchError(HillSpecError):
    """Eigenvalue count cross-check failed after width escalation."""


class MaxDepthError(HillSpecError):
    """Recursive box subdivision exceeded its depth budget."""


class NotAnEigenvalueError(DomainError):
    """Multiplicity query at a point that is not a periodic eigenvalue."""


class IllConditionedWarning(UserWarning):
    """Bessel Y close to integer order loses digits."""
