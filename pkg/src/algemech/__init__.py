"""AlgeMech - mechanics on almost-Lie algebroids, two formulations, one certificate suite."""

__version__ = "0.1.0"
__author__ = "AAlmana"
__license__ = "MIT"

from algemech.exceptions import (
    AlgeMechError,
    ConfigError,
    DimensionError,
    DomainError,
    ExpressionError,
    ExprSyntaxError,
    InadmissibleJetError,
    IntegrationError,
    MathError,
    ModelError,
    SingularHessianError,
    SingularMatrixError,
    UnknownIdentifierError,
)

__all__ = [
    "__version__",
    "__author__",
    "__license__",
    "AlgeMechError",
    "ConfigError",
    "DimensionError",
    "DomainError",
    "ExpressionError",
    "ExprSyntaxError",
    "InadmissibleJetError",
    "IntegrationError",
    "MathError",
    "ModelError",
    "SingularHessianError",
    "SingularMatrixError",
    "UnknownIdentifierError",
]
