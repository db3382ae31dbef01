"""Exception types shared across qcflab.

Each class carries the exit status the command-line front end maps it to.
"""


class QCError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ValidationError(QCError, ValueError):
    """Invalid parameters, dimensions or options."""

    exit_code = 2


class DimensionMismatch(ValidationError):
    """A vector or matrix does not match the chain size."""


class UnstableParams(QCError):
    """Parameters outside the regime where the requested quantity exists."""

    exit_code = 3


class SingularMatrix(UnstableParams):
    """A factorization met a zero (or negligible) pivot."""


class NotSPD(UnstableParams):
    """A matrix expected to be symmetric positive definite is not."""


class NotSymmetric(ValidationError):
    """A symmetric eigensolver was handed a nonsymmetric matrix."""


class ConvergenceError(QCError):
    """An iterative kernel did not converge within its budget."""

    exit_code = 4


class NoSignChange(QCError):
    """A root bracket does not contain a sign change."""

    exit_code = 4
