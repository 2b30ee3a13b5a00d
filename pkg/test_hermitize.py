import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ptqm.acceptability import build_metric
from ptqm.ensembles import random_acceptable, random_hermitian, random_invertible, random_state
from ptqm.errors import NonHermitianError, NotAcceptableError, ShapeError, SingularMatrixError
from ptqm.evolution import alpha_basis, spin_half, spin_half_closed_forms
from ptqm.hermitize import (
    BasisChange,
    Direction,
    hermitize,
    spectra_equal,
    to_nonorthogonal,
    transform_operator,
    transform_state,
)
from ptqm.linalg import dagger, eigvals_sorted, expm, identity
from ptqm.ptsym import jordan_counterexample


def assert_parallel(u, v, atol=1e-10):
    """Equal up to a global phase."""
    phase = np.vdot(u, v) / abs(np.vdot(u, v))
    assert_allclose(u * phase, v, atol=atol)


def test_basis_change_validation():
    with pytest.raises(SingularMatrixError):
        BasisChange.from_matrix([[1, 2], [2, 4]])
    with pytest.raises(SingularMatrixError):
        BasisChange(identity(2), 2 * identity(2))
    basis = BasisChange.from_inverse(alpha_basis(0.3).b_inv)
    assert basis.dim == 2
    assert basis.condition >= 1.0


def test_hermitize_hermitian_input(rng):
    h, d = random_hermitian(5, rng)
    pair = hermitize(h)
    assert_allclose(np.diag(pair.h_herm), np.sort(d), atol=1e-8)
    assert_allclose(dagger(pair.basis.b) @ pair.basis.b, np.eye(5), atol=1e-8)


def test_hermitize_spin_half():
    h_prime, _ = spin_half_closed_forms(1.0, 0.3)
    pair = hermitize(h_prime)
    assert_allclose(pair.h_herm, np.diag([-1.0, 1.0]), atol=1e-10)
    assert spectra_equal(pair.h_herm, spin_half(1.0))


@pytest.mark.parametrize("seed", range(200))
def test_hermitize_recovers_spectrum(seed):
    rng = np.random.default_rng(seed)
    h, d, _ = random_acceptable(int(rng.integers(2, 9)), rng)
    pair = hermitize(h)
    assert_allclose(np.diag(pair.h_herm).real, d, atol=1e-8)
    assert np.all(np.diag(pair.h_herm).imag == 0)
    residuals = pair.residuals()
    assert residuals["reconstruction"] <= 1e-8
    assert residuals["metric_orthonormality"] <= 1e-8


def test_hermitize_metric_matches_build_metric(rng):
    h, _, _ = random_acceptable(4, rng)
    pair = hermitize(h)
    assert_allclose(pair.metric.c, build_metric(h).c, atol=1e-8 * np.linalg.norm(pair.metric.c))


def test_hermitize_phase_convention(rng):
    h, _, _ = random_acceptable(3, rng)
    b = hermitize(h).basis.b
    for j in range(3):
        k = int(np.argmax(np.abs(b[:, j])))
        assert b[k, j].real > 0 and abs(b[k, j].imag) <= 1e-14
    assert_allclose(hermitize(h).basis.b, b)


def test_hermitize_rejects():
    with pytest.raises(NotAcceptableError) as info:
        hermitize(jordan_counterexample()[1])
    assert info.value.reasons == ["not diagonalizable"]


@pytest.mark.parametrize("seed", range(10))
def test_round_trip(seed):
    rng = np.random.default_rng(seed)
    d = np.sort(rng.uniform(-3, 3, size=4))
    basis = BasisChange.from_matrix(random_invertible(4, rng))
    h_prime, _ = to_nonorthogonal(np.diag(d), basis)
    assert_allclose(np.diag(hermitize(h_prime).h_herm).real, d, atol=1e-8)


def test_to_nonorthogonal_identity(rng):
    h, _ = random_hermitian(3, rng)
    h_prime, metric = to_nonorthogonal(h, BasisChange.from_matrix(identity(3)))
    assert_allclose(h_prime, h)
    assert_allclose(metric.c, np.eye(3))


@pytest.mark.parametrize("alpha", [0.0, 0.3, 0.7])
def test_to_nonorthogonal_closed_forms(alpha):
    epsilon = 1.7
    h_prime, metric = to_nonorthogonal(spin_half(epsilon), alpha_basis(alpha))
    h_closed, c_closed = spin_half_closed_forms(epsilon, alpha)
    assert_allclose(h_prime, h_closed, atol=1e-10 * np.linalg.norm(h_closed))
    assert_allclose(metric.c, c_closed, atol=1e-10 * np.linalg.norm(c_closed))


def test_to_nonorthogonal_rejects_non_hermitian():
    with pytest.raises(NonHermitianError):
        to_nonorthogonal([[1, 1], [0, 1]], alpha_basis(0.2))


@pytest.mark.parametrize("seed", range(100))
def test_amplitude_invariance(seed):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(2, 9))
    basis = BasisChange.from_matrix(random_invertible(dim, rng))
    psi, phi = random_state(dim, rng), random_state(dim, rng)
    _, metric = to_nonorthogonal(identity(dim), basis)
    primed = metric.inner(transform_state(psi, basis), transform_state(phi, basis))
    assert abs(primed - np.vdot(psi, phi)) <= 1e-9 * np.linalg.norm(psi) * np.linalg.norm(phi)


def test_evolution_covariance(rng):
    h, _ = random_hermitian(4, rng)
    basis = BasisChange.from_matrix(random_invertible(4, rng))
    h_prime, _ = to_nonorthogonal(h, basis)
    for t in (0.5, 2.0):
        assert_allclose(expm(-1j * h_prime * t), basis.b_inv @ expm(-1j * h * t) @ basis.b, atol=1e-8)


def test_transform_state_back_transformed_targets():
    alpha = 0.3
    basis = alpha_basis(alpha)
    scale = 1.0 / math.cos(2 * alpha)
    e1 = transform_state([1, 0], basis, Direction.BACKWARD)
    e2 = transform_state([0, 1], basis, "backward")
    assert_parallel(e1, scale * np.array([-math.cos(alpha), 1j * math.sin(alpha)]))
    assert_parallel(e2, scale * np.array([1j * math.sin(alpha), math.cos(alpha)]))


def test_transform_state_round_trip(rng):
    basis = BasisChange.from_matrix(random_invertible(5, rng))
    v = random_state(5, rng)
    forward = transform_state(v, basis, Direction.FORWARD)
    assert_allclose(transform_state(forward, basis, Direction.BACKWARD), v, atol=1e-10)
    with pytest.raises(ShapeError):
        transform_state([1, 2], basis)


def test_transform_operator(rng):
    basis = BasisChange.from_matrix(random_invertible(4, rng))
    assert_allclose(transform_operator(identity(4), basis), np.eye(4), atol=1e-10)
    o = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert_allclose(eigvals_sorted(transform_operator(o, basis)), eigvals_sorted(o), atol=1e-9)

    h, _, _ = random_acceptable(4, rng)
    pair = hermitize(h)
    diag = transform_operator(h, pair.basis)
    assert_allclose(diag, np.diag(np.diag(diag)), atol=1e-8)


def test_spectra_equal(rng):
    assert spectra_equal(spin_half(1.0), spin_half_closed_forms(1.0, 0.4)[0])
    assert not spectra_equal(identity(2), 2 * identity(2))
    h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    g = random_invertible(4, rng)
    assert spectra_equal(h, np.linalg.inv(g) @ h @ g)
    with pytest.raises(ShapeError):
        spectra_equal(identity(2), identity(3))
