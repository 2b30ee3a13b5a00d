"""Accepted Hamiltonians are Hermitian ones written in a non-orthogonal basis.

Conventions: a :class:`BasisChange` holds ``b`` and its inverse. Going to the
non-orthogonal description maps components as ``v' = b_inv @ v`` and operators
as ``o' = b_inv @ o @ b``; the physical inner product there is ``b^dagger b``.
:func:`hermitize` runs this backwards: with ``b`` the eigenvector matrix S,
``h_pt = b @ h_herm @ b_inv`` and the metric is ``b_inv^dagger b_inv``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
import numpy.typing as npt

from ptqm.acceptability import AcceptanceConfig, MetricOperator, accept
from ptqm.errors import NonHermitianError, NotAcceptableError, ShapeError, SingularMatrixError
from ptqm.linalg import (
    ComplexMatrix,
    ComplexVector,
    as_matrix,
    as_vector,
    check_same_dim,
    cond,
    dagger,
    eig,
    eigenspaces,
    frobenius,
    identity,
    inverse,
)
from ptqm.settings import DEFAULT_RTOL, DEFAULT_TOL

log = logging.getLogger(__name__)


class Direction(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


@dataclass(frozen=True)
class BasisChange:
    b: ComplexMatrix
    b_inv: ComplexMatrix

    def __post_init__(self) -> None:
        b = as_matrix(self.b)
        b_inv = as_matrix(self.b_inv)
        check_same_dim(b, b_inv)
        condition = cond(b)
        if not math.isfinite(condition):
            raise SingularMatrixError("basis change is singular", condition=condition)
        residual = frobenius(b @ b_inv - identity(b.shape[0]))
        if residual > DEFAULT_RTOL * condition:
            raise SingularMatrixError(f"b_inv is not the inverse of b (residual {residual:.3e})", condition=condition)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "b_inv", b_inv)

    @classmethod
    def from_matrix(cls, b: npt.ArrayLike) -> "BasisChange":
        return cls(as_matrix(b), inverse(b))

    @classmethod
    def from_inverse(cls, b_inv: npt.ArrayLike) -> "BasisChange":
        return cls(inverse(b_inv), as_matrix(b_inv))

    @property
    def dim(self) -> int:
        return int(self.b.shape[0])

    @property
    def condition(self) -> float:
        return cond(self.b)


@dataclass(frozen=True)
class EquivalencePair:
    h_pt: ComplexMatrix
    h_herm: ComplexMatrix
    basis: BasisChange
    metric: MetricOperator

    def residuals(self) -> Dict[str, float]:
        h, c = self.h_pt, self.metric.c
        rebuilt = self.basis.b @ self.h_herm @ self.basis.b_inv
        return {
            "reconstruction": frobenius(h - rebuilt) / max(frobenius(h), np.finfo(float).tiny),
            "metric_orthonormality": frobenius(dagger(self.basis.b) @ c @ self.basis.b - identity(self.basis.dim)),
            "pseudo_hermiticity": frobenius(dagger(h) @ c - c @ h) / max(frobenius(c) * frobenius(h), np.finfo(float).tiny),
        }


def _fix_phases(s: ComplexMatrix) -> ComplexMatrix:
    """Make the largest-modulus component of every column real and positive (first one on ties)."""
    out = s.copy()
    for j in range(s.shape[1]):
        k = int(np.argmax(np.abs(s[:, j])))
        out[:, j] *= np.conj(s[k, j]) / abs(s[k, j])
    return out


def hermitize(h: npt.ArrayLike, config: Optional[AcceptanceConfig] = None) -> EquivalencePair:
    cfg = config or AcceptanceConfig()
    h = as_matrix(h)
    report = accept(h, cfg)
    if not report.accepted:
        raise NotAcceptableError(report.reasons)

    spaces = eigenspaces(h, cluster_tol=cfg.cluster_tol)
    s = _fix_phases(np.column_stack([space.basis for space in spaces]))
    spectrum = np.concatenate([np.full(space.geometric, space.value.real) for space in spaces])
    h_herm = np.diag(spectrum).astype(np.complex128)

    basis = BasisChange.from_matrix(s)
    metric = MetricOperator(dagger(basis.b_inv) @ basis.b_inv)
    pair = EquivalencePair(h_pt=h, h_herm=h_herm, basis=basis, metric=metric)
    residuals = pair.residuals()
    if residuals["reconstruction"] > 1e-8:
        log.warning("hermitize reconstruction residual %.3e exceeds 1e-8", residuals["reconstruction"])
    log.debug("hermitize residuals: %s", residuals)
    return pair


def to_nonorthogonal(
    h_herm: npt.ArrayLike, b: BasisChange, tol: float = DEFAULT_TOL
) -> Tuple[ComplexMatrix, MetricOperator]:
    """Rewrite a Hermitian H in the basis b: H' = b_inv H b, metric C = b^dagger b."""
    h_herm = as_matrix(h_herm)
    check_same_dim(h_herm, b.b)
    asym = frobenius(h_herm - dagger(h_herm))
    if asym > tol * max(1.0, frobenius(h_herm)):
        raise NonHermitianError(asym)
    h_prime = b.b_inv @ h_herm @ b.b
    return h_prime, MetricOperator(dagger(b.b) @ b.b)


def transform_state(v: npt.ArrayLike, b: BasisChange, direction: Direction = Direction.FORWARD) -> ComplexVector:
    v = as_vector(v, b.dim)
    if Direction(direction) is Direction.FORWARD:
        return b.b_inv @ v
    return b.b @ v


def transform_operator(o: npt.ArrayLike, b: BasisChange) -> ComplexMatrix:
    o = as_matrix(o)
    check_same_dim(o, b.b)
    return b.b_inv @ o @ b.b


def spectra_equal(h1: npt.ArrayLike, h2: npt.ArrayLike, tol: float = DEFAULT_RTOL) -> bool:
    h1 = as_matrix(h1)
    h2 = as_matrix(h2)
    if h1.shape != h2.shape:
        raise ShapeError(f"spectra of different dimensions: {h1.shape[0]} vs {h2.shape[0]}")
    return bool(np.all(np.abs(eig(h1).values - eig(h2).values) <= tol))
