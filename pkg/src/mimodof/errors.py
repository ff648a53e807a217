"""Exception types shared across the package."""


class MimodofError(Exception):
    """Base class for all package errors."""


class ValidationError(MimodofError):
    """An input violates a documented contract (shape, range, feasibility)."""


class NumericalError(MimodofError):
    """A numerical routine failed to produce a trustworthy result."""


class DecompositionError(NumericalError):
    """A matrix factorization did not meet its residual tolerances."""
