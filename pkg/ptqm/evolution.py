"""Time evolution, physical overlaps and the spin-1/2 brachistochrone.

Evolution is psi(t) = exp(-i H t / hbar) psi0 in every description. The
first-passage time between two states is the first t at which the phase-free
physical fidelity

    F(t) = |<target|C|psi(t)>|^2 / (<target|C|target> <psi(t)|C|psi(t)>)

reaches 1 within tolerance. Computed in the non-orthogonal frame (H', B^dagger B)
and in the orthonormal frame (H, I) it gives the same number: the apparent
speed-up of the primed description is a property of the components, not of the
states.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field
from scipy import optimize

from ptqm.acceptability import MetricLike, MetricOperator, as_metric
from ptqm.errors import DomainError, SingularBasisError
from ptqm.hermitize import BasisChange, to_nonorthogonal
from ptqm.linalg import (
    ComplexMatrix,
    ComplexVector,
    as_matrix,
    as_vector,
    check_same_dim,
    eig,
    expm,
)
from ptqm.ptsym import SIGMA_X
from ptqm.settings import ALPHA_FLOOR, DEFAULT_COND_CAP

log = logging.getLogger(__name__)

E1 = np.array([1.0, 0.0], dtype=np.complex128)
E2 = np.array([0.0, 1.0], dtype=np.complex128)


class EvolutionConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    hbar: float = Field(1.0, gt=0)
    t_max: Optional[float] = Field(None, gt=0, description="search horizon; one spectral period when unset")
    grid_points: int = Field(1024, ge=16)
    root_polish_tol: float = Field(1e-10, gt=0, description="absolute tolerance on t for the final polish")
    fidelity_tol: float = Field(1e-8, gt=0, description="F >= 1 - fidelity_tol counts as arrival")
    coarse_threshold: float = Field(1e-4, gt=0, lt=1)
    cond_cap: float = Field(DEFAULT_COND_CAP, gt=1)
    alpha_margin: float = Field(1e-3, gt=0)


class BrachRecord(BaseModel):
    alpha: float
    tau_numeric: float
    tau_formula: float
    hermitian_bound: float
    gap: float
    basis_cond: float


def evolve(h: npt.ArrayLike, psi0: npt.ArrayLike, t: float, hbar: float = 1.0) -> ComplexVector:
    h = as_matrix(h)
    psi0 = as_vector(psi0, h.shape[0])
    if not math.isfinite(t):
        raise DomainError(f"evolution time must be finite, got {t!r}")

    return expm(-1j * h * t / hbar) @ psi0


def physical_overlap(c: MetricLike, phi: npt.ArrayLike, psi: npt.ArrayLike) -> complex:
    return as_metric(c).inner(phi, psi)


@dataclass(frozen=True)
class _Flow:
    """Everything F(t) and dF/dt need, validated once."""

    h: ComplexMatrix
    c: ComplexMatrix
    psi0: ComplexVector
    c_target: ComplexVector
    target_norm: float
    hbar: float

    @classmethod
    def build(cls, h: npt.ArrayLike, c: MetricLike, psi0: npt.ArrayLike, target: npt.ArrayLike, hbar: float) -> "_Flow":
        h = as_matrix(h)
        metric = as_metric(c)
        check_same_dim(h, metric.c)
        psi0 = as_vector(psi0, h.shape[0])
        target = as_vector(target, h.shape[0])
        if not np.any(target):
            raise DomainError("target state must be nonzero")
        c_target = metric.c @ target
        return cls(h, metric.c, psi0, c_target, float(np.vdot(target, c_target).real), hbar)

    def state(self, t: float) -> ComplexVector:
        return expm(-1j * self.h * t / self.hbar) @ self.psi0

    def fidelity_of(self, psi: ComplexVector) -> float:
        a = np.vdot(self.c_target, psi)
        n = np.vdot(psi, self.c @ psi).real
        return float(abs(a) ** 2 / (self.target_norm * n))

    def fidelity(self, t: float) -> float:
        return self.fidelity_of(self.state(t))

    def slope(self, t: float) -> float:
        psi = self.state(t)
        dpsi = (-1j / self.hbar) * (self.h @ psi)
        a = np.vdot(self.c_target, psi)
        da = np.vdot(self.c_target, dpsi)
        n = np.vdot(psi, self.c @ psi).real
        dn = 2.0 * np.vdot(psi, self.c @ dpsi).real
        return float((2.0 * (np.conj(a) * da).real * n - abs(a) ** 2 * dn) / (self.target_norm * n * n))

    def scan(self, t_max: float, points: int) -> Tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
        ts = np.linspace(0.0, t_max, points + 1)
        step = expm(-1j * self.h * (ts[1] - ts[0]) / self.hbar)
        fs = np.empty_like(ts)
        psi = self.psi0
        for k in range(ts.shape[0]):
            fs[k] = self.fidelity_of(psi)
            psi = step @ psi
        return ts, fs


def fidelity(h: npt.ArrayLike, c: MetricLike, psi0: npt.ArrayLike, target: npt.ArrayLike, t: float, hbar: float = 1.0) -> float:
    return _Flow.build(h, c, psi0, target, hbar).fidelity(t)


def fidelity_trace(
    h: npt.ArrayLike,
    c: MetricLike,
    psi0: npt.ArrayLike,
    target: npt.ArrayLike,
    t_grid: Sequence[float],
    hbar: float = 1.0,
) -> npt.NDArray[np.float64]:
    flow = _Flow.build(h, c, psi0, target, hbar)
    return np.array([flow.fidelity(t) for t in t_grid])


def natural_horizon(h: npt.ArrayLike, hbar: float = 1.0) -> Optional[float]:
    """2 pi hbar / (E_max - E_min): one full period of a two-level system. None for a degenerate spectrum."""
    values = eig(h).values.real
    gap = float(values.max() - values.min())
    if gap <= 0.0:
        return None
    return 2.0 * math.pi * hbar / gap


def _refine(flow: _Flow, lo: float, hi: float, cfg: EvolutionConfig) -> float:
    golden = optimize.minimize_scalar(
        lambda t: -flow.fidelity(t),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": cfg.root_polish_tol},
    )
    t_star = float(golden.x)
    # F is flat at its maximum; the slope has a simple root there
    width = hi - lo
    for half in (1e-4 * width, 1e-2 * width, width):
        a, b = max(lo, t_star - half), min(hi, t_star + half)
        if flow.slope(a) > 0.0 > flow.slope(b):
            return float(optimize.brentq(flow.slope, a, b, xtol=cfg.root_polish_tol))
    return t_star


def first_passage_time(
    h: npt.ArrayLike,
    c: MetricLike,
    psi0: npt.ArrayLike,
    target: npt.ArrayLike,
    config: Optional[EvolutionConfig] = None,
) -> Optional[float]:
    """Smallest t in [0, t_max] where psi(t) reaches ``target`` up to phase; None if it never does."""
    cfg = config or EvolutionConfig()
    flow = _Flow.build(h, c, psi0, target, cfg.hbar)
    threshold = 1.0 - cfg.fidelity_tol
    if flow.fidelity(0.0) >= threshold:
        return 0.0

    t_max = cfg.t_max if cfg.t_max is not None else natural_horizon(flow.h, cfg.hbar)
    if t_max is None:
        log.info("degenerate spectrum and no t_max: no time scale to search")
        return None
    ts, fs = flow.scan(t_max, cfg.grid_points)
    last = ts.shape[0] - 1
    for k in range(1, last + 1):
        if fs[k] < 1.0 - cfg.coarse_threshold or fs[k] < fs[k - 1]:
            continue
        if k < last and fs[k] < fs[k + 1]:
            continue
        t_star = _refine(flow, ts[k - 1], ts[min(k + 1, last)], cfg)
        if flow.fidelity(t_star) >= threshold:
            log.debug("first passage at t=%.15g (grid point %d)", t_star, k)
            return t_star
    log.info("no passage within t_max=%g", t_max)
    return None


def spin_half(epsilon: float) -> ComplexMatrix:
    """Spin-1/2 in a transverse field: epsilon * sigma_x."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon!r}")
    return epsilon * SIGMA_X


def alpha_basis(alpha: float, floor: float = ALPHA_FLOOR) -> BasisChange:
    """Non-orthogonal basis with B^-1 = [[cos a, -i sin a], [-i sin a, -cos a]].

    B^-1 squares to cos(2a) I, so the basis degenerates at every zero of cos 2a.
    """
    cos2 = math.cos(2.0 * alpha)
    if abs(cos2) < floor:
        raise SingularBasisError(alpha, cos2)
    ca, sa = math.cos(alpha), math.sin(alpha)
    b_inv = np.array([[ca, -1j * sa], [-1j * sa, -ca]], dtype=np.complex128)
    return BasisChange.from_inverse(b_inv)


def spin_half_closed_forms(epsilon: float, alpha: float) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """Closed forms of H' = B^-1 (eps sigma_x) B and C = B^dagger B."""
    cos2, sin2 = math.cos(2.0 * alpha), math.sin(2.0 * alpha)
    h_prime = (epsilon / cos2) * np.array([[-1j * sin2, -1], [-1, 1j * sin2]], dtype=np.complex128)
    c = (1.0 / cos2**2) * np.array([[1, -1j * sin2], [1j * sin2, 1]], dtype=np.complex128)
    return h_prime, c


def back_transformed_targets(alpha: float) -> Tuple[ComplexVector, ComplexVector]:
    """|e1> = B e1', |e2> = B e2' in the orthonormal description."""
    basis = alpha_basis(alpha)
    return basis.b @ E1, basis.b @ E2


def tau_formula(epsilon: float, alpha: float, hbar: float = 1.0) -> float:
    """(hbar/eps) arctan(1/tan 2a); pi hbar / (2 eps) at a = 0."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon!r}")
    if not 0.0 <= alpha < math.pi / 4:
        raise DomainError(f"alpha must lie in [0, pi/4), got {alpha!r}")
    return hbar / epsilon * math.atan2(math.cos(2.0 * alpha), math.sin(2.0 * alpha))


def hermitian_bound(omega: float, hbar: float = 1.0) -> float:
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega!r}")
    return math.pi * hbar / omega


def _checked_basis(alpha: float, cfg: EvolutionConfig) -> Tuple[BasisChange, float]:
    if not 0.0 <= alpha <= math.pi / 4 - cfg.alpha_margin:
        raise DomainError(f"alpha must lie in [0, pi/4 - {cfg.alpha_margin}], got {alpha!r}")
    basis = alpha_basis(alpha)
    basis_cond = basis.condition
    if basis_cond > cfg.cond_cap:
        raise SingularBasisError(alpha, math.cos(2.0 * alpha))
    return basis, basis_cond


def brach_point(epsilon: float, alpha: float, config: Optional[EvolutionConfig] = None) -> BrachRecord:
    cfg = config or EvolutionConfig()
    basis, basis_cond = _checked_basis(alpha, cfg)
    h_prime, metric = to_nonorthogonal(spin_half(epsilon), basis)
    values = eig(h_prime).values.real
    gap = float(values.max() - values.min())
    tau = first_passage_time(h_prime, metric, E1, E2, cfg)
    if tau is None:
        raise DomainError(f"no passage e1' -> e2' found for alpha={alpha!r}; raise t_max")
    return BrachRecord(
        alpha=alpha,
        tau_numeric=tau,
        tau_formula=tau_formula(epsilon, alpha, cfg.hbar),
        hermitian_bound=hermitian_bound(gap, cfg.hbar),
        gap=gap,
        basis_cond=basis_cond,
    )


def brach_sweep(
    epsilon: float,
    alpha_grid: Sequence[float],
    config: Optional[EvolutionConfig] = None,
    workers: int = 1,
) -> List[BrachRecord]:
    cfg = config or EvolutionConfig()
    point = partial(brach_point, epsilon, config=cfg)
    alphas = [float(a) for a in alpha_grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(point, alphas))
    else:
        records = [point(a) for a in alphas]
    log.info("brachistochrone sweep: %d points, epsilon=%g", len(records), epsilon)
    return sorted(records, key=lambda r: r.alpha)


def frame_comparison(epsilon: float, alpha: float, config: Optional[EvolutionConfig] = None) -> Tuple[float, float]:
    """First passage e1 -> e2 in the primed frame (H', B^dagger B) and in the orthonormal frame (H, I)."""
    cfg = config or EvolutionConfig()
    basis, _ = _checked_basis(alpha, cfg)
    h = spin_half(epsilon)
    h_prime, metric = to_nonorthogonal(h, basis)
    e1, e2 = basis.b @ E1, basis.b @ E2
    primed = first_passage_time(h_prime, metric, E1, E2, cfg)
    original = first_passage_time(h, MetricOperator.identity(2), e1, e2, cfg)
    if primed is None or original is None:
        raise DomainError(f"no passage found for alpha={alpha!r}; raise t_max")
    return primed, original


def shifted_oscillator(n_max: int) -> ComplexMatrix:
    """Truncation of p^2/2 + x^2/2 + i x to the lowest n_max number states."""
    if n_max < 8:
        raise DomainError(f"n_max must be at least 8, got {n_max}")
    a = np.diag(np.sqrt(np.arange(1, n_max, dtype=float)), k=1).astype(np.complex128)
    ad = a.conj().T
    x = (a + ad) / math.sqrt(2.0)
    p = 1j * (ad - a) / math.sqrt(2.0)
    return 0.5 * (p @ p) + 0.5 * (x @ x) + 1j * x


@dataclass(frozen=True)
class OscillatorLevels:
    n_max: int
    values: npt.NDArray[np.complex128]
    errors: npt.NDArray[np.float64]
    max_imag: float
    residual: float


def oscillator_levels(n_max: int, n_lowest: Optional[int] = None) -> OscillatorLevels:
    """Lowest levels of the truncation against the exact spectrum n + 1.

    Only the bottom ceil(n_max / 8) levels are meaningful; truncation spoils the top.
    """
    count = n_lowest if n_lowest is not None else math.ceil(n_max / 8)
    es = eig(shifted_oscillator(n_max))
    values = es.values[:count]
    exact = np.arange(1, count + 1, dtype=float)
    return OscillatorLevels(
        n_max=n_max,
        values=values,
        errors=np.abs(values - exact),
        max_imag=float(np.max(np.abs(values.imag))),
        residual=es.residual,
    )


def oscillator_study(n_values: Sequence[int], n_lowest: int = 1) -> List[OscillatorLevels]:
    return [oscillator_levels(n, n_lowest) for n in n_values]
