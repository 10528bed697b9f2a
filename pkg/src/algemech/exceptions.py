"""Custom exceptions for AlgeMech."""

from typing import Any


class AlgeMechError(Exception):
    """Base exception for all AlgeMech errors."""

    pass


class ConfigError(AlgeMechError):
    """Configuration validation or loading error."""

    pass


class ExpressionError(AlgeMechError):
    """Expression text could not be turned into a scalar field."""

    pass


class ExprSyntaxError(ExpressionError):
    """Malformed expression text.

    Attributes:
        offset: Byte offset of the offending character (0-based)
        line: 1-based line number
        column: 1-based column number
    """

    def __init__(self, message: str, text: str, offset: int) -> None:
        self.offset = offset
        self.line = text.count("\n", 0, offset) + 1
        self.column = offset - (text.rfind("\n", 0, offset) + 1) + 1
        super().__init__(f"{message} at line {self.line}, column {self.column}")


class UnknownIdentifierError(ExpressionError):
    """Identifier not declared for the field's domain."""

    def __init__(self, identifier: str, text: str, offset: int) -> None:
        self.identifier = identifier
        self.offset = offset
        self.line = text.count("\n", 0, offset) + 1
        self.column = offset - (text.rfind("\n", 0, offset) + 1) + 1
        super().__init__(
            f"Unknown identifier '{identifier}' at line {self.line}, column {self.column}"
        )


class ModelError(AlgeMechError):
    """Unknown, malformed or structurally invalid algebroid model."""

    pass


class DimensionError(ModelError):
    """Array or point shape does not match the model dimensions."""

    pass


class MathError(AlgeMechError):
    """Mathematical failure while evaluating or integrating."""

    pass


class DomainError(MathError):
    """Evaluation outside a function's domain (division by zero, log of non-positive)."""

    def __init__(self, message: str, expression: str | None = None) -> None:
        self.reason = message
        self.expression = expression
        if expression is not None:
            message = f"{message} in '{expression}'"
        super().__init__(message)


class SingularMatrixError(MathError):
    """Linear system that should be invertible is singular."""

    pass


class SingularHessianError(MathError):
    """Fiber Hessian of a Lagrangian is not invertible."""

    def __init__(
        self, message: str, time: float | None = None, trajectory: Any = None
    ) -> None:
        self.time = time
        self.trajectory = trajectory
        if time is not None:
            message = f"{message} at t={time!r}"
        super().__init__(message)


class InadmissibleJetError(MathError):
    """Jet (a, X) violates dx = rho(x) y."""

    pass


class BasePointMismatchError(MathError):
    """Objects attached to different base points were combined."""

    pass


class SideMismatchError(MathError):
    """Point or covector lives on the wrong bundle (E versus E*)."""

    pass


class IntegrationError(MathError):
    """Time integration aborted.

    Attributes:
        trajectory: Partial trajectory up to the last good step
        index: Index of the step that failed
        cause: Underlying error
    """

    def __init__(self, message: str, trajectory: Any, index: int, cause: Exception) -> None:
        self.trajectory = trajectory
        self.index = index
        self.cause = cause
        super().__init__(f"{message} at step {index}: {cause}")
