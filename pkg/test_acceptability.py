import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ptqm.acceptability import (
    COMPLEX_SPECTRUM,
    NOT_DIAGONALIZABLE,
    AcceptanceConfig,
    MetricOperator,
    Verdict,
    accept,
    build_metric,
    check_diagonalizable,
    check_probability_conservation,
    check_real_spectrum,
    eigenvector_matrix,
    is_hermitian_wrt,
    is_unitary_wrt,
    metric_residual,
)
from ptqm.ensembles import random_acceptable, random_hermitian, random_state, random_unitary
from ptqm.errors import MetricError, NotAcceptableError
from ptqm.evolution import spin_half_closed_forms
from ptqm.linalg import dagger, expm
from ptqm.ptsym import jordan_counterexample


def h_prime(alpha: float, epsilon: float = 1.0) -> np.ndarray:
    return spin_half_closed_forms(epsilon, alpha)[0]


def test_metric_operator_validation():
    with pytest.raises(MetricError):
        MetricOperator(np.array([[1, 1], [0, 1]], dtype=complex))
    with pytest.raises(MetricError):
        MetricOperator(np.diag([1.0, -1.0]))
    c = MetricOperator(np.diag([2.0, 3.0]))
    assert c.inner([1, 1j], [1, 1j]) == pytest.approx(5.0)


def test_check_real_spectrum(rng):
    real, max_imag = check_real_spectrum(np.diag([1, 1j, -1j]))
    assert not real and max_imag == pytest.approx(1.0)
    assert check_real_spectrum(random_hermitian(5, rng)[0])[0]
    assert check_real_spectrum(h_prime(0.3))[0]


def test_check_diagonalizable():
    _, jordan = jordan_counterexample()
    ok, eigvec_cond = check_diagonalizable(jordan)
    assert not ok and math.isinf(eigvec_cond)
    ok, eigvec_cond = check_diagonalizable(np.eye(3))
    assert ok and eigvec_cond == pytest.approx(1.0)


def test_eigvec_cond_grows_towards_degenerate_basis():
    conds = [check_diagonalizable(h_prime(a))[1] for a in (0.1, 0.4, 0.7, 0.78)]
    assert all(later > earlier for earlier, later in zip(conds, conds[1:]))


def test_build_metric_hermitian_is_identity(rng):
    h, _ = random_hermitian(6, rng)
    assert_allclose(build_metric(h).c, np.eye(6), atol=1e-8)


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.6])
def test_build_metric_matches_closed_form_up_to_scale(alpha):
    _, closed = spin_half_closed_forms(1.0, alpha)
    built = build_metric(h_prime(alpha)).c
    scale = built[0, 0].real / closed[0, 0].real
    assert scale > 0
    assert_allclose(built, scale * closed, atol=1e-10 * scale)


@pytest.mark.parametrize("seed", range(100))
def test_build_metric_orthonormalizes_eigenvectors(seed):
    rng = np.random.default_rng(seed)
    h, _, _ = random_acceptable(int(rng.integers(2, 9)), rng)
    metric = build_metric(h)
    s, _ = eigenvector_matrix(h)
    assert metric_residual(s, metric) <= 1e-8


def test_build_metric_rejects():
    with pytest.raises(NotAcceptableError) as info:
        build_metric(np.diag([1, 1j]))
    assert info.value.reasons == [COMPLEX_SPECTRUM]
    with pytest.raises(NotAcceptableError) as info:
        build_metric(jordan_counterexample()[1])
    assert info.value.reasons == [NOT_DIAGONALIZABLE]


def test_metric_does_not_depend_on_eigenvector_phases(rng):
    h, _, _ = random_acceptable(4, rng)
    s, _ = eigenvector_matrix(h)
    rephased = s * np.exp(1j * rng.uniform(0, 2 * np.pi, size=4))
    metric = build_metric(h)
    assert metric_residual(s, metric) <= 1e-8
    assert metric_residual(rephased, metric) <= 1e-8


def test_hermitian_wrt(rng):
    h, _ = random_hermitian(4, rng)
    assert is_hermitian_wrt(h, np.eye(4))
    hp = h_prime(0.3)
    assert is_hermitian_wrt(hp, build_metric(hp))
    assert not is_hermitian_wrt(hp, np.eye(2))


def test_unitary_wrt(rng):
    assert is_unitary_wrt(random_unitary(4, rng), np.eye(4))
    hp = h_prime(0.3)
    metric = build_metric(hp)
    for t in np.linspace(0.0, 10.0, 11):
        assert is_unitary_wrt(expm(-1j * hp * t), metric)
    assert not is_unitary_wrt(expm(-1j * hp), np.eye(2))


def test_probability_conservation(rng):
    h, _ = random_hermitian(4, rng)
    states = [random_state(4, rng) for _ in range(4)]
    assert check_probability_conservation(h, np.eye(4), np.linspace(0, 10, 11), states)

    hp = h_prime(0.5)
    states = [random_state(2, rng) for _ in range(32)]
    assert check_probability_conservation(hp, build_metric(hp), np.linspace(0, 10, 21), states)

    _, jordan = jordan_counterexample()
    assert not check_probability_conservation(jordan, np.eye(2), [0.0, 5.0], [np.array([0, 1])])


def test_accept_examples():
    report = accept(jordan_counterexample()[1])
    assert report.verdict is Verdict.REJECTED
    assert report.reasons == [NOT_DIAGONALIZABLE]
    assert report.metric is None

    report = accept(h_prime(0.3))
    assert report.accepted
    assert report.reasons == []
    assert report.metric is not None
    assert report.pseudo_hermitian and report.probability_conserving and report.unitary_evolution

    report = accept(np.diag([1, 1j, -1j]))
    assert report.reasons == [COMPLEX_SPECTRUM]
    assert not report.diagonalizable


def test_accept_hermitian_fixed_point(rng):
    report = accept(random_hermitian(5, rng)[0])
    assert report.accepted
    assert np.linalg.norm(report.metric.c - np.eye(5)) <= 1e-8


@pytest.mark.parametrize("seed", range(100))
def test_accepted_matrices_are_pseudo_hermitian_and_conserve(seed):
    rng = np.random.default_rng(seed)
    h, _, _ = random_acceptable(int(rng.integers(2, 9)), rng)
    report = accept(h, AcceptanceConfig(seed=seed, t_points=6))
    assert report.accepted
    c = report.metric.c
    assert np.linalg.norm(dagger(h) @ c - c @ h) <= 1e-8 * np.linalg.norm(c) * np.linalg.norm(h)


def test_report_to_dict_encodes_infinite_condition():
    data = accept(jordan_counterexample()[1]).to_dict()
    assert data["verdict"] == "rejected"
    assert data["eigvec_cond"] == "inf"
    assert data["metric"] is None


def test_config_validation():
    with pytest.raises(ValueError):
        AcceptanceConfig(tol=-1.0)
    assert AcceptanceConfig().seed == 0
