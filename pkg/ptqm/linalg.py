"""Dense complex linear algebra kernel.

Matrices are plain ``numpy`` arrays of dtype complex128; every public function
validates its input with :func:`as_matrix` / :func:`as_vector` and returns new
arrays, so results can be shared freely between threads.

The heavy lifting is LAPACK: ``geev`` (Hessenberg reduction, shifted QR, then
eigenvector back-substitution) for eigenproblems of non-normal matrices and
scipy's scaling-and-squaring Padé ``expm``. This module adds the contract on
top: deterministic ordering, unit-norm eigenvectors, residual certification,
and condition-aware failure modes.

JSON form of a matrix (see ``ptqm.formats``)::

    {"dim": N, "entries": [[re, im], ...]}   # row-major, N*N pairs
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from scipy import linalg as sla

from ptqm.errors import EigenDecompositionError, ExpmOverflowError, ShapeError, SingularMatrixError
from ptqm.settings import CLUSTER_TOL, DEFAULT_RTOL, RANK_TOL

ComplexMatrix = npt.NDArray[np.complex128]
ComplexVector = npt.NDArray[np.complex128]

log = logging.getLogger(__name__)

_EPS = float(np.finfo(float).eps)


def as_matrix(m: npt.ArrayLike) -> ComplexMatrix:
    arr = np.array(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ShapeError(f"expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ShapeError("matrix has non-finite entries")
    return arr


def as_vector(v: npt.ArrayLike, dim: Optional[int] = None) -> ComplexVector:
    arr = np.array(v, dtype=np.complex128)
    if arr.ndim != 1 or arr.shape[0] == 0:
        raise ShapeError(f"expected a non-empty vector, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ShapeError(f"dimension mismatch: vector has length {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ShapeError("vector has non-finite entries")
    return arr


def check_same_dim(*matrices: ComplexMatrix) -> int:
    dims = {m.shape[0] for m in matrices}
    if len(dims) != 1:
        raise ShapeError(f"dimension mismatch between operands: {sorted(dims)}")
    return dims.pop()


def frobenius(m: npt.ArrayLike) -> float:
    return float(np.linalg.norm(np.asarray(m)))


def dagger(m: ComplexMatrix) -> ComplexMatrix:
    return np.conj(m).T


def identity(dim: int) -> ComplexMatrix:
    return np.eye(dim, dtype=np.complex128)


@dataclass(frozen=True)
class Eigensystem:
    """Eigenvalues sorted by (Re, Im, original index); column j of ``vectors`` belongs to ``values[j]``."""

    values: npt.NDArray[np.complex128]
    vectors: ComplexMatrix
    residual: float

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])


def _spectral_order(values: npt.NDArray[np.complex128], scale: float) -> npt.NDArray[np.intp]:
    # real parts equal to ~1e-9 relative are treated as ties so the Im key decides
    re_key = np.round(values.real / scale, 9)
    return np.lexsort((np.arange(values.shape[0]), values.imag, re_key))


def eig(m: npt.ArrayLike, rtol: float = DEFAULT_RTOL) -> Eigensystem:
    m = as_matrix(m)
    norm = frobenius(m)
    try:
        values, vectors = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise EigenDecompositionError(f"QR iteration did not converge: {exc}", residual=math.inf) from exc

    vectors = vectors / np.linalg.norm(vectors, axis=0)
    order = _spectral_order(values, max(norm, 1.0))
    values = values[order]
    vectors = vectors[:, order]

    residual = float(np.max(np.linalg.norm(m @ vectors - vectors * values, axis=0)))
    if residual > rtol * norm:
        raise EigenDecompositionError("eigenpairs fail the residual bound", residual=residual)
    log.debug("eig: dim=%d residual=%.3e", m.shape[0], residual)
    return Eigensystem(values=values, vectors=vectors, residual=residual)


def eigvals_sorted(m: npt.ArrayLike, rtol: float = DEFAULT_RTOL) -> npt.NDArray[np.complex128]:
    return eig(m, rtol=rtol).values


def expm(m: npt.ArrayLike) -> ComplexMatrix:
    m = as_matrix(m)
    with np.errstate(over="ignore", invalid="ignore"):
        result = sla.expm(m)
    if not np.all(np.isfinite(result)):
        raise ExpmOverflowError(frobenius(m))
    return np.asarray(result, dtype=np.complex128)


def cond(m: npt.ArrayLike) -> float:
    """2-norm condition number; ``math.inf`` when the matrix is numerically singular."""
    m = as_matrix(m)
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0.0 or s[-1] <= s[0] * m.shape[0] * _EPS:
        return math.inf
    return float(s[0] / s[-1])


def inverse(m: npt.ArrayLike, rtol: float = DEFAULT_RTOL) -> ComplexMatrix:
    m = as_matrix(m)
    c = cond(m)
    if not math.isfinite(c):
        raise SingularMatrixError("matrix is singular to working precision", condition=c)
    inv = np.linalg.inv(m)
    residual = frobenius(m @ inv - identity(m.shape[0]))
    if residual > rtol * c:
        raise SingularMatrixError(f"inverse fails the round-trip bound (residual {residual:.3e})", condition=c)
    return inv


def orthonormalize(vectors: ComplexMatrix, rank_tol: float = RANK_TOL) -> ComplexMatrix:
    """Modified Gram-Schmidt over the columns, dropping columns that are numerically dependent."""
    kept: List[ComplexVector] = []
    for j in range(vectors.shape[1]):
        w = np.array(vectors[:, j], dtype=np.complex128)
        ref = np.linalg.norm(w)
        if ref == 0.0:
            continue
        for _ in range(2):
            for q in kept:
                w = w - np.vdot(q, w) * q
        if np.linalg.norm(w) <= rank_tol * ref:
            continue
        kept.append(w / np.linalg.norm(w))
    if not kept:
        return np.zeros((vectors.shape[0], 0), dtype=np.complex128)
    return np.column_stack(kept)


@dataclass(frozen=True)
class Eigenspace:
    value: complex
    algebraic: int
    basis: ComplexMatrix
    indices: Tuple[int, ...]

    @property
    def geometric(self) -> int:
        return int(self.basis.shape[1])

    @property
    def defective(self) -> bool:
        return self.geometric < self.algebraic


def _clusters(values: Sequence[complex], tol: float) -> List[List[int]]:
    parent = list(range(len(values)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            if abs(values[i] - values[j]) <= tol:
                parent[find(j)] = find(i)

    groups: dict[int, List[int]] = {}
    for i in range(len(values)):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def eigenspaces(
    m: npt.ArrayLike,
    cluster_tol: float = CLUSTER_TOL,
    rank_tol: float = RANK_TOL,
    system: Optional[Eigensystem] = None,
) -> List[Eigenspace]:
    """Group the spectrum into eigenspaces with orthonormal bases.

    Eigenvalues closer than ``cluster_tol * max(1, ||m||_F)`` share a space. The
    width of each basis is the geometric multiplicity, so a defective matrix
    shows up as a space with ``geometric < algebraic``.
    """
    m = as_matrix(m)
    es = system if system is not None else eig(m)
    scale = max(frobenius(m), 1.0)
    spaces: List[Eigenspace] = []
    for group in _clusters(list(es.values), cluster_tol * scale):
        basis = orthonormalize(es.vectors[:, group], rank_tol=rank_tol)
        spaces.append(
            Eigenspace(
                value=complex(np.mean(es.values[group])),
                algebraic=len(group),
                basis=basis,
                indices=tuple(group),
            )
        )
    return spaces
