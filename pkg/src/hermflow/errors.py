"""Exception hierarchy shared by every module."""


class HermflowError(Exception):
    """Base class for all library errors."""


class InvalidInputError(HermflowError, ValueError):
    """Input is malformed: wrong shape, non-finite, wrong symmetry type."""


class DegenerateInputError(HermflowError, ValueError):
    """Input is singular or not positive definite where that is required."""


class CompatibilityError(HermflowError, ValueError):
    """A (g, omega) pair fails one of the almost Hermitian invariants.

    The ``invariant`` attribute names the failed check.
    """

    def __init__(self, invariant, message):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class GenerationError(HermflowError, RuntimeError):
    """Random generation exhausted its retry budget."""


class NumericalFailureError(HermflowError, RuntimeError):
    """A linear solve or assembly broke down."""


class DriftError(HermflowError, RuntimeError):
    """Integrated state left the constraint set beyond tolerance."""

    def __init__(self, message, time=None, residual=None):
        super().__init__(message if time is None else f"{message} (t={time:.6g})")
        self.time = time
        self.residual = residual


class DomainError(HermflowError, ValueError):
    """A closed-form curve was evaluated past its singularity."""
