"""Physical acceptability of a Hamiltonian and the metric that makes it Hermitian.

A Hamiltonian is accepted when, in order:

1. its spectrum is real,
2. it is diagonalizable (well-conditioned eigenvector matrix),
3. a metric C exists making its eigenvectors orthonormal, built as C = (S^-1)^dagger S^-1,
4. probabilities are conserved: H is Hermitian and exp(-iHt) unitary with respect to C.

Checks run in that order and stop at the first failure.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field

from ptqm.ensembles import random_state
from ptqm.errors import MetricError, NotAcceptableError
from ptqm.formats import matrix_to_dict
from ptqm.linalg import (
    ComplexMatrix,
    as_matrix,
    as_vector,
    check_same_dim,
    cond,
    dagger,
    eig,
    eigenspaces,
    expm,
    frobenius,
    identity,
    inverse,
)
from ptqm.settings import CLUSTER_TOL, DEFAULT_COND_CAP, DEFAULT_RTOL, DEFAULT_TOL, default_seed

log = logging.getLogger(__name__)

COMPLEX_SPECTRUM = "complex spectrum"
NOT_DIAGONALIZABLE = "not diagonalizable"
METRIC_NOT_POSITIVE = "metric not positive definite"
NOT_PSEUDO_HERMITIAN = "not pseudo-Hermitian"
PROBABILITY_NOT_CONSERVED = "probabilities not conserved"
EVOLUTION_NOT_UNITARY = "evolution not unitary in metric"


@dataclass(frozen=True)
class MetricOperator:
    """Hermitian positive-definite C defining the physical inner product <phi|C|psi>."""

    c: ComplexMatrix
    tol: float = DEFAULT_TOL

    def __post_init__(self) -> None:
        c = as_matrix(self.c)
        asym = frobenius(c - dagger(c))
        if asym > self.tol * max(frobenius(c), 1.0):
            raise MetricError(f"metric is not Hermitian (||C - C^dagger||_F = {asym:.3e})")
        c = 0.5 * (c + dagger(c))
        smallest = float(np.linalg.eigvalsh(c)[0])
        if smallest <= 0.0:
            raise MetricError(f"metric is not positive definite (smallest eigenvalue {smallest:.3e})")
        object.__setattr__(self, "c", c)

    @property
    def dim(self) -> int:
        return int(self.c.shape[0])

    @classmethod
    def identity(cls, dim: int) -> "MetricOperator":
        return cls(identity(dim))

    def inner(self, phi: npt.ArrayLike, psi: npt.ArrayLike) -> complex:
        phi = as_vector(phi, self.dim)
        psi = as_vector(psi, self.dim)
        return complex(np.vdot(phi, self.c @ psi))


MetricLike = Union[MetricOperator, npt.ArrayLike]


def as_metric(c: MetricLike) -> MetricOperator:
    return c if isinstance(c, MetricOperator) else MetricOperator(as_matrix(c))


class AcceptanceConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    tol: float = Field(DEFAULT_RTOL, gt=0, description="real-spectrum tolerance, relative to max(1, ||H||_F)")
    cond_cap: float = Field(DEFAULT_COND_CAP, gt=1)
    cluster_tol: float = Field(CLUSTER_TOL, gt=0)
    herm_tol: float = Field(DEFAULT_TOL, gt=0)
    prob_tol: float = Field(DEFAULT_TOL, gt=0)
    t_max: float = Field(10.0, gt=0)
    t_points: int = Field(21, ge=2)
    n_states: int = Field(8, ge=1)
    seed: int = Field(default_factory=default_seed)

    def t_grid(self) -> npt.NDArray[np.float64]:
        return np.linspace(0.0, self.t_max, self.t_points)


class Verdict(str, Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"


@dataclass
class AcceptabilityReport:
    real_spectrum: bool = False
    max_imag: float = float("nan")
    diagonalizable: bool = False
    eigvec_cond: float = float("nan")
    metric: Optional[MetricOperator] = None
    metric_residual: Optional[float] = None
    pseudo_hermitian: bool = False
    probability_conserving: bool = False
    unitary_evolution: bool = False
    verdict: Verdict = Verdict.REJECTED
    reasons: List[str] = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return self.verdict is Verdict.ACCEPTED

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "reasons": list(self.reasons),
            "real_spectrum": self.real_spectrum,
            "max_imag": self.max_imag,
            "diagonalizable": self.diagonalizable,
            "eigvec_cond": self.eigvec_cond if np.isfinite(self.eigvec_cond) else "inf",
            "pseudo_hermitian": self.pseudo_hermitian,
            "probability_conserving": self.probability_conserving,
            "unitary_evolution": self.unitary_evolution,
            "metric_residual": self.metric_residual,
            "metric": matrix_to_dict(self.metric.c) if self.metric is not None else None,
        }


def check_real_spectrum(h: npt.ArrayLike, tol: float = DEFAULT_RTOL) -> Tuple[bool, float]:
    h = as_matrix(h)
    max_imag = float(np.max(np.abs(eig(h).values.imag)))
    return max_imag <= tol * max(1.0, frobenius(h)), max_imag


def eigenvector_matrix(h: npt.ArrayLike, cluster_tol: float = CLUSTER_TOL) -> Tuple[ComplexMatrix, bool]:
    """Columns: unit eigenvectors, orthonormalized inside degenerate eigenspaces. Flag is True when defective."""
    spaces = eigenspaces(h, cluster_tol=cluster_tol)
    s = np.column_stack([space.basis for space in spaces if space.geometric > 0])
    return s, any(space.defective for space in spaces)


def check_diagonalizable(
    h: npt.ArrayLike, cond_cap: float = DEFAULT_COND_CAP, cluster_tol: float = CLUSTER_TOL
) -> Tuple[bool, float]:
    s, defective = eigenvector_matrix(h, cluster_tol=cluster_tol)
    if defective:
        return False, float("inf")
    eigvec_cond = cond(s)
    return eigvec_cond <= cond_cap, eigvec_cond


def metric_residual(s: ComplexMatrix, metric: MetricOperator) -> float:
    return frobenius(dagger(s) @ metric.c @ s - identity(s.shape[0]))


def build_metric(
    h: npt.ArrayLike,
    tol: float = DEFAULT_RTOL,
    cond_cap: float = DEFAULT_COND_CAP,
    cluster_tol: float = CLUSTER_TOL,
) -> MetricOperator:
    h = as_matrix(h)
    real, _ = check_real_spectrum(h, tol)
    if not real:
        raise NotAcceptableError([COMPLEX_SPECTRUM])
    s, defective = eigenvector_matrix(h, cluster_tol=cluster_tol)
    if defective or cond(s) > cond_cap:
        raise NotAcceptableError([NOT_DIAGONALIZABLE])
    s_inv = inverse(s)
    metric = MetricOperator(dagger(s_inv) @ s_inv)
    log.debug("build_metric: ||S^dagger C S - I||_F = %.3e", metric_residual(s, metric))
    return metric


def is_hermitian_wrt(o: npt.ArrayLike, c: MetricLike, tol: float = DEFAULT_TOL) -> bool:
    o = as_matrix(o)
    metric = as_metric(c)
    check_same_dim(o, metric.c)
    return frobenius(dagger(o) @ metric.c - metric.c @ o) <= tol * frobenius(metric.c) * frobenius(o)


def is_unitary_wrt(u: npt.ArrayLike, c: MetricLike, tol: float = DEFAULT_TOL) -> bool:
    u = as_matrix(u)
    metric = as_metric(c)
    check_same_dim(u, metric.c)
    return frobenius(dagger(u) @ metric.c @ u - metric.c) <= tol * frobenius(metric.c)


def check_probability_conservation(
    h: npt.ArrayLike,
    c: MetricLike,
    t_grid: Sequence[float],
    states: Sequence[npt.ArrayLike],
    tol: float = DEFAULT_TOL,
    hbar: float = 1.0,
) -> bool:
    h = as_matrix(h)
    metric = as_metric(c)
    check_same_dim(h, metric.c)
    initial = [as_vector(psi, h.shape[0]) for psi in states]
    norms0 = [np.vdot(psi, metric.c @ psi).real for psi in initial]
    for t in t_grid:
        u = expm(-1j * h * t / hbar)
        for psi, n0 in zip(initial, norms0):
            psi_t = u @ psi
            nt = np.vdot(psi_t, metric.c @ psi_t).real
            if abs(nt - n0) > tol * n0:
                log.debug("probability drift %.3e at t=%g", abs(nt - n0) / n0, t)
                return False
    return True


def accept(h: npt.ArrayLike, config: Optional[AcceptanceConfig] = None) -> AcceptabilityReport:
    cfg = config or AcceptanceConfig()
    h = as_matrix(h)
    report = AcceptabilityReport()

    report.real_spectrum, report.max_imag = check_real_spectrum(h, cfg.tol)
    if not report.real_spectrum:
        report.reasons.append(COMPLEX_SPECTRUM)
        return _finish(report)

    report.diagonalizable, report.eigvec_cond = check_diagonalizable(h, cfg.cond_cap, cfg.cluster_tol)
    if not report.diagonalizable:
        report.reasons.append(NOT_DIAGONALIZABLE)
        return _finish(report)

    s, _ = eigenvector_matrix(h, cluster_tol=cfg.cluster_tol)
    try:
        report.metric = build_metric(h, cfg.tol, cfg.cond_cap, cfg.cluster_tol)
    except MetricError as exc:
        log.info("metric construction failed: %s", exc)
        report.reasons.append(METRIC_NOT_POSITIVE)
        return _finish(report)
    report.metric_residual = metric_residual(s, report.metric)

    prob_tol = cfg.prob_tol * max(1.0, report.eigvec_cond)
    rng = np.random.default_rng(cfg.seed)
    states = [random_state(h.shape[0], rng) for _ in range(cfg.n_states)]
    grid = cfg.t_grid()

    report.pseudo_hermitian = is_hermitian_wrt(h, report.metric, cfg.herm_tol)
    report.probability_conserving = check_probability_conservation(h, report.metric, grid, states, prob_tol)
    report.unitary_evolution = all(is_unitary_wrt(expm(-1j * h * t), report.metric, prob_tol) for t in grid)
    if not report.pseudo_hermitian:
        report.reasons.append(NOT_PSEUDO_HERMITIAN)
    if not report.probability_conserving:
        report.reasons.append(PROBABILITY_NOT_CONSERVED)
    if not report.unitary_evolution:
        report.reasons.append(EVOLUTION_NOT_UNITARY)
    return _finish(report)


def _finish(report: AcceptabilityReport) -> AcceptabilityReport:
    report.verdict = Verdict.REJECTED if report.reasons else Verdict.ACCEPTED
    log.info("acceptability verdict: %s %s", report.verdict.value, report.reasons or "")
    return report
