from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import numpy.typing as npt

from ptqm.errors import CommutationError, DomainError, RealityViolationError, SingularMatrixError
from ptqm.linalg import (
    ComplexMatrix,
    ComplexVector,
    as_matrix,
    as_vector,
    check_same_dim,
    cond,
    eigenspaces,
    frobenius,
    identity,
)
from ptqm.settings import DEFAULT_TOL

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AntilinearOperator:
    """v -> m @ conj(v). ``m`` must be invertible; ``involutory`` asks for A^2 = 1 to be enforced."""

    m: ComplexMatrix
    involutory: bool = False

    def __post_init__(self) -> None:
        m = as_matrix(self.m)
        object.__setattr__(self, "m", m)
        c = cond(m)
        if not math.isfinite(c):
            raise SingularMatrixError("anti-linear operator has a nonzero kernel", condition=c)
        if self.involutory and not is_involution(self):
            raise DomainError("operator flagged involutory but m @ conj(m) != I")

    @property
    def dim(self) -> int:
        return int(self.m.shape[0])

    @classmethod
    def conjugation(cls, dim: int) -> "AntilinearOperator":
        return cls(identity(dim), involutory=True)

    @classmethod
    def from_parity(cls, p: npt.ArrayLike) -> "AntilinearOperator":
        """The PT operator v -> P conj(v), with T fixed to complex conjugation."""
        return cls(as_matrix(p))


def apply(a: AntilinearOperator, v: npt.ArrayLike) -> ComplexVector:
    v = as_vector(v, a.dim)
    return a.m @ np.conj(v)


def is_involution(a: AntilinearOperator, tol: float = DEFAULT_TOL) -> bool:
    return frobenius(a.m @ np.conj(a.m) - identity(a.dim)) <= tol


def commutation_residual(h: ComplexMatrix, a: AntilinearOperator) -> float:
    # H(A v) = H m conj(v), A(H v) = m conj(H) conj(v)
    return frobenius(h @ a.m - a.m @ np.conj(h)) / max(frobenius(h), np.finfo(float).tiny)


def commutes_with(h: npt.ArrayLike, a: AntilinearOperator, tol: float = DEFAULT_TOL) -> bool:
    h = as_matrix(h)
    check_same_dim(h, a.m)
    return frobenius(h @ a.m - a.m @ np.conj(h)) <= tol * frobenius(h)


@dataclass(frozen=True)
class SharedRecord:
    eigenvalue: complex
    is_shared: bool
    antilinear_eigenvalue: Optional[complex]
    residual: float
    subspace: int


@dataclass(frozen=True)
class SharedSpectrumReport:
    records: List[SharedRecord] = field(default_factory=list)
    unbroken: bool = True
    defective: bool = False

    @property
    def shared(self) -> List[SharedRecord]:
        return [r for r in self.records if r.is_shared]


def _invariance_residual(basis: ComplexMatrix, image: ComplexMatrix) -> float:
    """Squared sine of the angle between span(image) and span(basis); 1 - cos^2 for single vectors."""
    leak = image - basis @ (np.conj(basis).T @ image)
    return float(frobenius(leak) ** 2 / frobenius(image) ** 2)


def shared_spectrum(h: npt.ArrayLike, a: AntilinearOperator, tol: float = DEFAULT_TOL) -> SharedSpectrumReport:
    """Which eigenvectors of ``h`` are also eigenvectors of ``a``.

    Degenerate eigenspaces are tested as a whole: the space is shared when A maps
    it into itself. A defective ``h`` is flagged on the report and only its
    genuine eigenvectors get records.
    """
    h = as_matrix(h)
    check_same_dim(h, a.m)
    if not commutes_with(h, a, tol):
        raise CommutationError(commutation_residual(h, a))

    spaces = eigenspaces(h)
    records: List[SharedRecord] = []
    for k, space in enumerate(spaces):
        image = a.m @ np.conj(space.basis)
        residual = _invariance_residual(space.basis, image)
        shared = residual <= tol
        a_value: Optional[complex] = None
        if shared and space.geometric == 1:
            v = space.basis[:, 0]
            a_value = complex(np.vdot(v, image[:, 0]) / np.vdot(v, v).real)
        records.extend(
            SharedRecord(
                eigenvalue=space.value,
                is_shared=shared,
                antilinear_eigenvalue=a_value,
                residual=residual,
                subspace=k,
            )
            for _ in range(space.geometric)
        )

    bound = tol * max(1.0, frobenius(h))
    worst = max((abs(r.eigenvalue.imag) for r in records if r.is_shared), default=0.0)
    if worst > bound:
        raise RealityViolationError(worst)

    defective = any(s.defective for s in spaces)
    if defective:
        log.warning("Hamiltonian is defective: eigenvectors span %d of %d dimensions",
                    sum(s.geometric for s in spaces), h.shape[0])
    report = SharedSpectrumReport(
        records=records,
        unbroken=all(r.is_shared for r in records),
        defective=defective,
    )
    log.debug("shared_spectrum: %d/%d shared, unbroken=%s", len(report.shared), len(records), report.unbroken)
    return report


def worked_triplet() -> Tuple[ComplexMatrix, AntilinearOperator]:
    """diag(1, i, -i) with the swap-and-conjugate operator (a, b, c) -> (a*, c*, b*)."""
    h = np.diag([1.0, 1.0j, -1.0j]).astype(np.complex128)
    swap = np.array([[1, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=np.complex128)
    return h, AntilinearOperator(swap, involutory=True)
