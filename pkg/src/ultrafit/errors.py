"""Exception hierarchy.

Validation errors (bad inputs, malformed files, out-of-range parameters)
map to CLI exit code 2; numerical errors to exit code 3.
"""


class UltrafitError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(UltrafitError, ValueError):
    """Invalid input data or parameters."""


class NumericalError(UltrafitError, ArithmeticError):
    """Numerical failure during optimization."""


class SelfLoopError(ValidationError):
    pass


class DuplicateEdgeError(ValidationError):
    pass


class DisconnectedError(ValidationError):
    pass


class VertexOutOfRangeError(ValidationError):
    pass


class LengthMismatchError(ValidationError):
    pass


class KOutOfRangeError(ValidationError):
    pass


class NodeOutOfRangeError(ValidationError):
    pass


class NonpositiveWeightError(ValidationError):
    pass


class InsufficientClassesError(ValidationError):
    pass


class TooLargeError(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class NonFiniteCostError(NumericalError):
    """The objective became NaN or infinite; carries the iteration index."""

    def __init__(self, message: str, iteration: int):
        super().__init__(message)
        self.iteration = iteration
