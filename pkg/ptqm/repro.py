"""Named reproduction suites. Each returns a :class:`SuiteResult` of pass/fail checks plus a JSON payload."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from ptqm.acceptability import NOT_DIAGONALIZABLE, AcceptanceConfig, MetricOperator, accept, build_metric
from ptqm.antilinear import commutes_with, is_involution, worked_triplet, shared_spectrum
from ptqm.ensembles import random_acceptable, random_invertible, random_state
from ptqm.evolution import (
    E1,
    E2,
    EvolutionConfig,
    alpha_basis,
    brach_sweep,
    evolve,
    first_passage_time,
    frame_comparison,
    hermitian_bound,
    oscillator_levels,
    spin_half,
    spin_half_closed_forms,
    tau_formula,
)
from ptqm.formats import complex_pairs, matrix_to_dict
from ptqm.hermitize import BasisChange, hermitize, to_nonorthogonal, transform_state
from ptqm.linalg import dagger, eigenspaces, frobenius
from ptqm.ptsym import jordan_counterexample, satisfies_pt
from ptqm.settings import default_seed

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class SuiteResult:
    suite: str
    checks: List[Check] = field(default_factory=list)
    payload: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(Check(name, bool(passed), detail))
        log.debug("%s/%s: %s %s", self.suite, name, "ok" if passed else "FAILED", detail)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
            "payload": self.payload,
        }


def antilinear_suite() -> SuiteResult:
    result = SuiteResult("antilinear")
    h, a = worked_triplet()
    result.check("involution", is_involution(a))
    result.check("commutes", commutes_with(h, a, tol=1e-12))

    report = shared_spectrum(h, a, tol=1e-12)
    shared = report.shared
    result.check("one shared eigenvector", len(shared) == 1, f"{len(shared)} shared")
    result.check(
        "shared eigenvalue is 1",
        len(shared) == 1 and abs(shared[0].eigenvalue - 1.0) <= 1e-12,
    )
    result.check("symmetry broken", not report.unbroken)
    result.payload = {
        "h": matrix_to_dict(h),
        "a": matrix_to_dict(a.m),
        "records": [
            {
                "eigenvalue": complex_pairs([r.eigenvalue])[0],
                "shared": r.is_shared,
                "antilinear_eigenvalue": complex_pairs([r.antilinear_eigenvalue])[0]
                if r.antilinear_eigenvalue is not None
                else None,
                "residual": r.residual,
            }
            for r in report.records
        ],
        "unbroken": report.unbroken,
    }
    return result


def counterexample_suite(config: Optional[AcceptanceConfig] = None) -> SuiteResult:
    result = SuiteResult("counterexample")
    p, h = jordan_counterexample()
    result.check("PT condition holds", satisfies_pt(h, p))

    spaces = eigenspaces(h)
    vectors = [space.basis[:, j] for space in spaces for j in range(space.geometric)]
    result.check("single eigenvector", len(vectors) == 1, f"{len(vectors)} eigenvectors")
    if vectors:
        result.check("eigenvector along (1, 0)", abs(abs(vectors[0][0]) - 1.0) <= 1e-9)

    report = accept(h, config)
    result.check("rejected", not report.accepted)
    result.check("reason: not diagonalizable", NOT_DIAGONALIZABLE in report.reasons, ", ".join(report.reasons))

    psi0 = E2
    drift = abs(np.vdot(evolve(h, psi0, 5.0), evolve(h, psi0, 5.0)).real - 1.0)
    result.check("norm drifts under the identity metric", drift > 0.01, f"relative drift {drift:.3g} at t=5")
    result.payload = {
        "p": matrix_to_dict(p.p),
        "h": matrix_to_dict(h),
        "report": report.to_dict(),
        "norm_drift_t5": drift,
    }
    return result


def spin_half_suite(alpha: float = 0.3, epsilon: float = 1.0, config: Optional[EvolutionConfig] = None) -> SuiteResult:
    cfg = config or EvolutionConfig()
    result = SuiteResult("spin-half")
    basis = alpha_basis(alpha)
    h = spin_half(epsilon)
    h_prime, metric = to_nonorthogonal(h, basis)
    h_closed, c_closed = spin_half_closed_forms(epsilon, alpha)

    result.check("H' closed form", np.max(np.abs(h_prime - h_closed)) <= 1e-10)
    result.check("B^dagger B closed form", np.max(np.abs(metric.c - c_closed)) <= 1e-10)
    built = build_metric(h_prime).c
    scale = built[0, 0].real / c_closed[0, 0].real
    result.check("built metric proportional to closed form", np.max(np.abs(built - scale * c_closed)) <= 1e-10 * scale)
    result.check("built metric scale positive", scale > 0.0, f"scale {scale:.6g}")

    tau = first_passage_time(h_prime, metric, E1, E2, cfg)
    expected = tau_formula(epsilon, alpha, cfg.hbar)
    result.check(
        "first passage matches formula",
        tau is not None and abs(tau - expected) <= 1e-8 * cfg.hbar / epsilon,
        f"tau={tau} formula={expected}",
    )
    primed, original = frame_comparison(epsilon, alpha, cfg)
    result.check("frame independent", abs(primed - original) <= 1e-8, f"primed={primed} original={original}")
    result.payload = {
        "alpha": alpha,
        "epsilon": epsilon,
        "h_prime": matrix_to_dict(h_prime),
        "metric": matrix_to_dict(metric.c),
        "tau_numeric": tau,
        "tau_formula": expected,
        "hermitian_bound": hermitian_bound(2.0 * epsilon, cfg.hbar),
        "basis_cond": basis.condition,
    }
    return result


def brachistochrone_suite(epsilon: float = 1.0, config: Optional[EvolutionConfig] = None, workers: int = 1) -> SuiteResult:
    cfg = config or EvolutionConfig()
    result = SuiteResult("brachistochrone")
    unit = cfg.hbar / epsilon
    alphas = np.round(np.arange(1, 77) * 0.01, 2)
    records = brach_sweep(epsilon, alphas, cfg, workers=workers)

    worst = max(abs(r.tau_numeric - r.tau_formula) for r in records)
    result.check("sweep matches formula", worst <= 1e-8 * unit, f"max deviation {worst:.3e}")
    gap_err = max(abs(r.gap - 2.0 * epsilon) for r in records)
    result.check("gap fixed at 2 epsilon", gap_err <= 1e-9, f"max deviation {gap_err:.3e}")
    first, last = records[0], records[-1]
    result.check(
        "alpha=0.01 limit",
        abs(first.tau_formula - (math.pi / 2 - 0.02) * unit) <= 1e-12 * unit,
        f"tau={first.tau_numeric}",
    )
    result.check("alpha=0.76 far below bound", last.tau_numeric < 0.1 * math.pi / 2 * unit, f"tau={last.tau_numeric}")

    hermitian = first_passage_time(spin_half(epsilon), MetricOperator.identity(2), E1, E2, cfg)
    bound = hermitian_bound(2.0 * epsilon, cfg.hbar)
    result.check(
        "Hermitian passage saturates the bound",
        hermitian is not None and abs(hermitian - bound) <= 1e-9,
        f"tau={hermitian} bound={bound}",
    )
    for alpha in (0.2, 0.5, 0.7):
        primed, original = frame_comparison(epsilon, alpha, cfg)
        result.check(f"frame independent at alpha={alpha}", abs(primed - original) <= 1e-8)
    result.payload = {"epsilon": epsilon, "records": [r.model_dump() for r in records]}
    return result


def equivalence_suite(count: int = 200, seed: Optional[int] = None, config: Optional[AcceptanceConfig] = None) -> SuiteResult:
    seed = default_seed() if seed is None else seed
    cfg = config or AcceptanceConfig(seed=seed)
    result = SuiteResult("equivalence")
    rng = np.random.default_rng(seed)

    rejected = 0
    spectrum_err = orth_err = herm_err = drift = 0.0
    for _ in range(count):
        dim = int(rng.integers(2, 9))
        h, d, _g = random_acceptable(dim, rng)
        report = accept(h, cfg)
        if not report.accepted:
            rejected += 1
            continue
        pair = hermitize(h, cfg)
        residuals = pair.residuals()
        spectrum_err = max(spectrum_err, float(np.max(np.abs(np.diag(pair.h_herm).real - d))))
        orth_err = max(orth_err, residuals["metric_orthonormality"])
        herm_err = max(herm_err, residuals["pseudo_hermiticity"])
        c = pair.metric.c
        psi = random_state(dim, rng)
        n0 = np.vdot(psi, c @ psi).real
        for t in np.linspace(0.0, 10.0, 11):
            psi_t = evolve(h, psi, t)
            drift = max(drift, abs(np.vdot(psi_t, c @ psi_t).real - n0) / n0)

    result.check("all accepted", rejected == 0, f"{rejected}/{count} rejected")
    result.check("spectrum recovered", spectrum_err <= 1e-8, f"{spectrum_err:.3e}")
    result.check("eigenvectors orthonormal in metric", orth_err <= 1e-8, f"{orth_err:.3e}")
    result.check("pseudo-Hermitian", herm_err <= 1e-8, f"{herm_err:.3e}")
    result.check("probability conserved", drift <= 1e-9, f"{drift:.3e}")

    worst = 0.0
    for _ in range(100):
        dim = int(rng.integers(2, 9))
        basis = BasisChange.from_matrix(random_invertible(dim, rng))
        psi, phi = random_state(dim, rng), random_state(dim, rng)
        metric = dagger(basis.b) @ basis.b
        primed = np.vdot(transform_state(psi, basis), metric @ transform_state(phi, basis))
        worst = max(worst, abs(primed - np.vdot(psi, phi)) / (frobenius(psi) * frobenius(phi)))
    result.check("amplitudes basis independent", worst <= 1e-9, f"{worst:.3e}")
    result.payload = {
        "count": count,
        "seed": seed,
        "max_spectrum_error": spectrum_err,
        "max_metric_orthonormality": orth_err,
        "max_pseudo_hermiticity": herm_err,
        "max_norm_drift": drift,
        "max_amplitude_error": worst,
    }
    return result


def oscillator_suite(n_max: int = 64) -> SuiteResult:
    result = SuiteResult("oscillator")
    levels = oscillator_levels(n_max, n_lowest=5)
    result.check("five lowest levels", float(np.max(levels.errors)) <= 1e-6, f"errors {levels.errors.tolist()}")
    result.check("low spectrum real", levels.max_imag < 1e-8, f"max |Im| {levels.max_imag:.3e}")

    ground = [oscillator_levels(n, n_lowest=1).errors[0] for n in range(16, n_max + 1, 8)]
    monotone = all(later <= max(earlier, 1e-12) for earlier, later in zip(ground, ground[1:]))
    result.check("ground state converges monotonically", monotone, f"errors {ground}")
    result.payload = {
        "n_max": n_max,
        "values": complex_pairs(levels.values),
        "errors": levels.errors.tolist(),
        "ground_state_errors": {str(n): e for n, e in zip(range(16, n_max + 1, 8), ground)},
    }
    return result


SUITES: Dict[str, Callable[..., SuiteResult]] = {
    "antilinear": antilinear_suite,
    "counterexample": counterexample_suite,
    "spin-half": spin_half_suite,
    "brachistochrone": brachistochrone_suite,
    "equivalence": equivalence_suite,
    "oscillator": oscillator_suite,
}


def suite_options(alpha: float = 0.3, epsilon: float = 1.0, count: int = 200, seed: Optional[int] = None) -> Dict[str, Dict[str, Any]]:
    """Keyword arguments each suite takes from the shared repro options."""
    return {
        "spin-half": {"alpha": alpha, "epsilon": epsilon},
        "brachistochrone": {"epsilon": epsilon},
        "equivalence": {"count": count, "seed": seed},
    }


def run_suite(name: str, **kwargs: Any) -> SuiteResult:
    return SUITES[name](**suite_options(**kwargs).get(name, {}))


def run_all(alpha: float = 0.3, epsilon: float = 1.0, count: int = 200, seed: Optional[int] = None) -> List[SuiteResult]:
    return [run_suite(name, alpha=alpha, epsilon=epsilon, count=count, seed=seed) for name in SUITES]
