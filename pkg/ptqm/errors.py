from __future__ import annotations

from typing import List, Optional


class PTQMError(Exception):
    """Base class for every error raised by ptqm."""


class ShapeError(PTQMError, ValueError):
    """Matrix not square, vector of the wrong length, or non-finite entries."""


class DomainError(PTQMError, ValueError):
    """Argument outside the documented range of an operation."""


class SchemaError(PTQMError, ValueError):
    def __init__(self, message: str, path: Optional[str] = None, field: Optional[str] = None) -> None:
        self.path = path
        self.field = field
        where = ":".join(p for p in (path, field) if p)
        super().__init__(f"{where}: {message}" if where else message)


class EigenDecompositionError(PTQMError):
    def __init__(self, message: str, residual: float) -> None:
        self.residual = residual
        super().__init__(f"{message} (residual {residual:.3e})")


class ExpmOverflowError(PTQMError):
    def __init__(self, norm: float) -> None:
        self.norm = norm
        super().__init__(f"matrix exponential overflowed for ||m||_F = {norm:.3e}")


class SingularMatrixError(PTQMError):
    def __init__(self, message: str, condition: float) -> None:
        self.condition = condition
        super().__init__(f"{message} (condition estimate {condition:.3e})")


class InvalidParityError(PTQMError):
    def __init__(self, residual: float) -> None:
        self.residual = residual
        super().__init__(f"parity operator does not square to the identity (||P^2 - I||_F = {residual:.3e})")


class CommutationError(PTQMError):
    def __init__(self, residual: float) -> None:
        self.residual = residual
        super().__init__(f"Hamiltonian does not commute with the anti-linear operator (relative residual {residual:.3e})")


class RealityViolationError(PTQMError):
    def __init__(self, max_imag: float) -> None:
        self.max_imag = max_imag
        super().__init__(f"shared eigenvector carries a complex eigenvalue (|Im| = {max_imag:.3e})")


class NonHermitianError(PTQMError):
    def __init__(self, residual: float) -> None:
        self.residual = residual
        super().__init__(f"matrix is not Hermitian (||m - m^dagger||_F = {residual:.3e})")


class MetricError(PTQMError):
    """Candidate metric is not Hermitian positive definite."""


class NotAcceptableError(PTQMError):
    def __init__(self, reasons: List[str]) -> None:
        self.reasons = list(reasons)
        super().__init__("Hamiltonian rejected: " + ", ".join(self.reasons))


class SingularBasisError(PTQMError):
    def __init__(self, alpha: float, cos2alpha: float) -> None:
        self.alpha = alpha
        self.cos2alpha = cos2alpha
        super().__init__(
            f"basis vectors are linearly dependent at alpha = {alpha!r} (|cos 2alpha| = {abs(cos2alpha):.3e})"
        )
