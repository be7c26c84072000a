"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` for bad or
unphysical input (CLI exit code 2) and :class:`NumericalFailure` for
breakdowns of the linear algebra (CLI exit code 3).
"""


class CVQKDError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(CVQKDError, ValueError):
    """Input rejected before or during evaluation."""


class InvalidParameter(ValidationError):
    pass


class UnphysicalParameter(InvalidParameter):
    pass


class UnphysicalState(ValidationError):
    pass


class InvalidStatistics(ValidationError):
    pass


class InconsistentEstimate(ValidationError):
    pass


class InsufficientData(ValidationError):
    pass


class MalformedInput(ValidationError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericalFailure(CVQKDError, ArithmeticError):
    """Linear-algebra breakdown (non-positive-definite matrix, singular block, ...)."""


class ReconstructionMismatch(NumericalFailure):
    """Purification did not reproduce its input; indicates a convention bug."""
