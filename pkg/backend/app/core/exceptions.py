"""
Custom exceptions for orbispec.

Every exception carries an HTTP status code (used by the API) and a process
exit code (used by the CLI): 2 for invalid input or a failed check, 1 for
internal errors.
"""
from typing import Any, Dict, Optional


class OrbispecException(Exception):
    """Base exception for orbispec."""

    def __init__(
        self,
        message: str,
        status_code: int = 500,
        exit_code: int = 1,
        context: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.status_code = status_code
        self.exit_code = exit_code
        self.context = context or {}
        super().__init__(self.message)

    def to_report(self) -> Dict[str, Any]:
        """Structured error report shared by the CLI and the API."""
        return {
            "error": type(self).__name__,
            "message": self.message,
            "status_code": self.status_code,
            "context": self.context,
        }


class ValidationError(OrbispecException):
    """Input failed validation."""

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message, status_code=400, exit_code=2, context=context)


class SchemaError(ValidationError):
    """Group file does not match the crystal JSON schema."""

    def __init__(
        self,
        message: str,
        source: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None
    ):
        context = {"source": source, "line": line, "column": column}
        where = source or "<input>"
        if line is not None:
            where = f"{where}:{line}" + (f":{column}" if column is not None else "")
        super().__init__(f"{where}: {message}", context={k: v for k, v in context.items() if v is not None})


class NotOrthogonal(ValidationError):
    """A generator does not preserve the Gram matrix (g^T G g != G)."""


class NonInvertible(ValidationError):
    """A generator matrix has |det| != 1."""


class NotFiniteOrder(ValidationError):
    """A matrix has infinite order or its char poly is not a product of cyclotomics."""


class OrderCapExceeded(ValidationError):
    """Group closure produced more holonomy elements than the order cap."""


class InconsistentTranslation(ValidationError):
    """Two group words give the same matrix with different translations mod 1."""


class SingularMatrix(ValidationError):
    """Matrix is not invertible."""


class NotPositiveDefinite(ValidationError):
    """Gram matrix is not symmetric positive definite."""


class BoundMismatch(ValidationError):
    """Spectrum tables with different degree or bound were compared."""


class InvalidCodim(ValidationError):
    """Codimension outside 1..d-1 was requested."""


class KrawtchoukZero(ValidationError):
    """K_p^d(k) vanishes, so the singular volume is invisible to the p-spectrum."""


class BudgetExceeded(OrbispecException):
    """Lattice enumeration would exceed the configured vector cap."""

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message, status_code=413, exit_code=2, context=context)


class NotApplicable(OrbispecException):
    """A certificate does not apply to the given singular set."""

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message, status_code=422, exit_code=2, context=context)


class ValidationFailed(OrbispecException):
    """Heat-trace validation failed: the two expansion routes disagree, or residuals do not decay."""

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message, status_code=422, exit_code=2, context=context)


class ToleranceViolation(OrbispecException):
    """A floating-point integrality or reality gate tripped."""

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(f"Tolerance violation: {message}", status_code=500, exit_code=1, context=context)


class ConfigurationError(OrbispecException):
    """Configuration error."""

    def __init__(self, message: str):
        super().__init__(f"Configuration error: {message}", status_code=500, exit_code=2)
