"""
Exception hierarchy for matrix, state and harness failures.
"""

from typing import Optional


class UncertaintyError(Exception):
    """Base class for every error raised by this package."""


class MatrixError(UncertaintyError, ValueError):
    """A matrix argument does not satisfy an operation's precondition."""


class NotSquareError(MatrixError):
    pass


class NotHermitianError(MatrixError):
    pass


class NotPSDError(MatrixError):
    pass


class NotPositiveDefiniteError(MatrixError):
    pass


class DimensionMismatchError(MatrixError):
    pass


class InvalidWeightError(MatrixError):
    pass


class InvalidPError(MatrixError):
    pass


class InvalidKError(MatrixError):
    pass


class BlockMismatchError(MatrixError):
    pass


class InvalidStateError(MatrixError):
    """Density matrix is not PSD or does not have unit trace."""


class ParseError(UncertaintyError):
    """Problem or config file could not be parsed."""

    def __init__(
        self, message: str, field: Optional[str] = None, line: Optional[int] = None
    ):
        """
        Args:
            message: Human readable description
            field: Dotted path of the offending field, if known
            line: 1-based line number in the source file, if known
        """
        self.field = field
        self.line = line
        context = []
        if line is not None:
            context.append(f"line {line}")
        if field:
            context.append(f"field '{field}'")
        if context:
            message = f"{message} ({', '.join(context)})"
        super().__init__(message)


class ProblemValidationError(UncertaintyError):
    """Parsed problem does not describe a valid state and observable tuple."""


class UnknownCaseError(UncertaintyError):
    pass


class UnknownRelationError(UncertaintyError):
    pass
