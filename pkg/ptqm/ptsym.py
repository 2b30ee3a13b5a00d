"""PT-symmetric Hamiltonians for a chosen parity, with T fixed to complex conjugation.

The consistency condition checked throughout is H = P conj(H) P.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
import numpy.typing as npt

from ptqm.ensembles import ginibre
from ptqm.errors import DomainError, InvalidParityError
from ptqm.linalg import ComplexMatrix, as_matrix, check_same_dim, frobenius, identity
from ptqm.settings import DEFAULT_RTOL, DEFAULT_TOL, default_seed

SIGMA_X: ComplexMatrix = np.array([[0, 1], [1, 0]], dtype=np.complex128)


def parity_residual(p: npt.ArrayLike) -> float:
    p = as_matrix(p)
    return frobenius(p @ p - identity(p.shape[0]))


def validate_parity(p: npt.ArrayLike, tol: float = DEFAULT_TOL) -> bool:
    return parity_residual(p) <= tol


@dataclass(frozen=True)
class ParityOperator:
    """Involutory P. Need not be Hermitian, real or diagonal."""

    p: ComplexMatrix
    tol: float = DEFAULT_TOL

    def __post_init__(self) -> None:
        p = as_matrix(self.p)
        object.__setattr__(self, "p", p)
        residual = parity_residual(p)
        if residual > self.tol:
            raise InvalidParityError(residual)

    @property
    def dim(self) -> int:
        return int(self.p.shape[0])

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.p.imag == 0.0))


ParityLike = Union[ParityOperator, npt.ArrayLike]


def _parity(p: ParityLike) -> ParityOperator:
    return p if isinstance(p, ParityOperator) else ParityOperator(as_matrix(p))


def pt_residual(h: npt.ArrayLike, p: ParityLike) -> float:
    h = as_matrix(h)
    parity = _parity(p)
    check_same_dim(h, parity.p)
    return frobenius(h - parity.p @ np.conj(h) @ parity.p) / max(frobenius(h), np.finfo(float).tiny)


def satisfies_pt(h: npt.ArrayLike, p: ParityLike, tol: float = DEFAULT_RTOL) -> bool:
    h = as_matrix(h)
    parity = _parity(p)
    check_same_dim(h, parity.p)
    return frobenius(h - parity.p @ np.conj(h) @ parity.p) <= tol * frobenius(h)


def general_2x2(h11: complex, h12: complex, h22: Optional[complex] = None) -> ComplexMatrix:
    """Most general H with H = sigma_x conj(H) sigma_x: [[h11, h12], [h12*, h22*]] with h22 = h11."""
    if h22 is None:
        h22 = h11
    elif abs(h22 - h11) > 1e-12 * max(1.0, abs(h11)):
        raise DomainError(f"sigma_x symmetry forces h22 = h11, got h11={h11!r}, h22={h22!r}")
    return np.array(
        [[h11, h12], [np.conj(h12), np.conj(h22)]],
        dtype=np.complex128,
    )


def random_pt(p: ParityLike, seed: Optional[int] = None) -> ComplexMatrix:
    """h = (x + P conj(x) P) / 2 for a seeded complex x. Only real P guarantees the condition."""
    parity = _parity(p)
    if not parity.is_real:
        raise DomainError("random_pt needs a real-entried parity operator")
    rng = np.random.default_rng(default_seed() if seed is None else seed)
    x = ginibre(parity.dim, rng)
    return 0.5 * (x + parity.p @ np.conj(x) @ parity.p)


def jordan_counterexample() -> Tuple[ParityOperator, ComplexMatrix]:
    """PT-symmetric, real spectrum, yet not diagonalizable."""
    p = ParityOperator(np.array([[1, 1], [0, -1]], dtype=np.complex128))
    h = np.array([[1, 5j], [0, 1]], dtype=np.complex128)
    return p, h
