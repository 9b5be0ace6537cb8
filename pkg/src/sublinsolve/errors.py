"""Exception types shared across the package."""


class SublinsolveError(Exception):
    """Base class for all package-specific errors."""


class EmptyVector(SublinsolveError):
    """Raised when building a sampled vector from an empty sequence."""


class ZeroNormSample(SublinsolveError):
    """Raised when sampling from a structure with zero total weight."""


class DuplicateEntry(SublinsolveError):
    """Raised when a matrix entry list names the same (i, j) twice."""


class NonfiniteSample(SublinsolveError):
    """Raised when an estimator draw overflows to inf or nan."""


class IterationCapExceeded(SublinsolveError):
    """Raised when rejection sampling exceeds its trial budget.

    Signals that the target vector is (numerically) zero or that the cap
    was sized for a different instance.
    """


class RankDeficientSketch(SublinsolveError):
    """Raised when the sketched core matrix has fewer than k usable
    singular values."""


class EstimatorFailure(SublinsolveError):
    """Raised when an estimator cannot produce a finite value within its
    failure budget."""


class ZeroSolution(SublinsolveError):
    """Raised when the solution vector is too small to sample from
    meaningfully."""


class NotPSD(SublinsolveError):
    """Raised when a matrix required to be positive semidefinite is not."""


class DimensionTooLarge(SublinsolveError):
    """Raised when a dense oracle operation is requested above the desk-scale
    cap."""
