"""Exception types raised across the toolkit."""


class GridGspError(Exception):
    """Base class for all toolkit errors."""


class CaseFormatError(GridGspError):
    """A grid case or phasor file failed parsing or validation."""


class NonDiagonalizableError(GridGspError):
    """A complex symmetric operator has no complex-orthogonal eigenbasis
    within tolerance (quasi-null bilinear norm of some eigenvector)."""


class SingularOperatorError(GridGspError):
    """An operator (or an interior block during reduction) is singular
    relative to the configured tolerance."""


class ConvergenceError(GridGspError):
    """An iterative solver hit its iteration cap before meeting tolerances.

    Carries the last primal/dual residuals for diagnosis.
    """

    def __init__(self, message, primal_residual=None, dual_residual=None):
        super().__init__(message)
        self.primal_residual = primal_residual
        self.dual_residual = dual_residual


class AttackInfeasibleError(GridGspError):
    """No unobservable perturbation exists for the requested bus set."""


class StreamFormatError(GridGspError):
    """A coded stream is malformed, truncated or version-incompatible."""


class CaseWarning(UserWarning):
    """Warn-level finding while validating a grid case (e.g. disconnection)."""


class StabilityWarning(UserWarning):
    """An AR recursion has a root on or outside the unit circle."""
