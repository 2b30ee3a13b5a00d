import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ptqm.ensembles import ginibre, random_hermitian, random_invertible
from ptqm.errors import ExpmOverflowError, ShapeError, SingularMatrixError
from ptqm.evolution import alpha_basis
from ptqm.linalg import (
    as_matrix,
    cond,
    dagger,
    eig,
    eigenspaces,
    eigvals_sorted,
    expm,
    identity,
    inverse,
    orthonormalize,
)
from ptqm.ptsym import SIGMA_X


def taylor_expm(m: np.ndarray, terms: int = 30) -> np.ndarray:
    """Reference: scale into the unit ball, sum the series, square back."""
    squarings = max(0, int(math.ceil(math.log2(max(np.linalg.norm(m), 1.0)))))
    a = m / 2**squarings
    term = np.eye(m.shape[0], dtype=complex)
    total = term.copy()
    for k in range(1, terms):
        term = term @ a / k
        total = total + term
    for _ in range(squarings):
        total = total @ total
    return total


def test_eig_identity():
    es = eig(np.eye(3))
    assert_allclose(es.values, [1, 1, 1])
    assert_allclose(np.abs(es.vectors), np.eye(3), atol=1e-12)


def test_eig_orders_by_real_then_imaginary():
    es = eig(np.diag([1.0, 1j, -1j]))
    assert_allclose(es.values, [-1j, 1j, 1])
    assert_allclose(np.abs(es.vectors), np.eye(3)[:, [2, 1, 0]], atol=1e-12)


def test_eig_hermitian_is_real_and_orthogonal(rng):
    h, _ = random_hermitian(6, rng)
    es = eig(h)
    assert np.max(np.abs(es.values.imag)) < 1e-10
    assert_allclose(dagger(es.vectors) @ es.vectors, np.eye(6), atol=1e-10)


def test_eig_residual_and_unit_columns(rng):
    m = ginibre(7, rng)
    es = eig(m)
    assert es.residual <= 1e-9 * np.linalg.norm(m)
    assert_allclose(np.linalg.norm(es.vectors, axis=0), np.ones(7), rtol=1e-12)
    assert np.linalg.norm(m @ es.vectors - es.vectors * es.values) <= 1e-8 * np.linalg.norm(m)


@pytest.mark.parametrize("seed", range(5))
def test_eigenvalues_invariant_under_similarity(seed):
    rng = np.random.default_rng(seed)
    m = ginibre(5, rng)
    g = random_invertible(5, rng)
    assert_allclose(eigvals_sorted(np.linalg.inv(g) @ m @ g), eigvals_sorted(m), atol=1e-8)


@pytest.mark.parametrize("bad", [np.zeros((2, 3)), np.zeros((0, 0)), np.array([[1.0, np.nan], [0, 1]])])
def test_as_matrix_rejects(bad):
    with pytest.raises(ShapeError):
        as_matrix(bad)


def test_expm_zero_and_diagonal():
    assert_allclose(expm(np.zeros((3, 3))), np.eye(3))
    assert_allclose(expm(np.diag([0.5, -2.0 + 1j])), np.diag([np.exp(0.5), np.exp(-2.0 + 1j)]), rtol=1e-12)


def test_expm_quarter_turn():
    u = expm(-1j * (math.pi / 2) * SIGMA_X)
    assert_allclose(u, -1j * SIGMA_X, atol=1e-12)
    assert_allclose(u @ np.array([1, 0]), [0, -1j], atol=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_expm_against_series(seed):
    rng = np.random.default_rng(seed)
    m = 2.0 * ginibre(6, rng)
    ref = taylor_expm(m)
    assert np.linalg.norm(expm(m) - ref) <= 1e-10 * np.linalg.norm(ref)


@pytest.mark.parametrize("seed", range(4))
def test_expm_inverse_and_unitarity(seed):
    rng = np.random.default_rng(seed)
    m = ginibre(8, rng)
    m = m * (10.0 / np.linalg.norm(m))
    assert_allclose(expm(m) @ expm(-m), np.eye(8), atol=1e-9)
    h, _ = random_hermitian(8, rng)
    u = expm(-1j * h)
    assert_allclose(dagger(u) @ u, np.eye(8), atol=1e-9)


def test_expm_overflow_reports_norm():
    with pytest.raises(ExpmOverflowError) as info:
        expm(1000.0 * np.eye(2))
    assert info.value.norm == pytest.approx(1000.0 * math.sqrt(2))


def test_inverse():
    assert_allclose(inverse(np.eye(4)), np.eye(4))
    flip = alpha_basis(0.0).b_inv
    assert_allclose(flip, np.diag([1, -1]), atol=1e-15)
    assert_allclose(inverse(flip), flip, atol=1e-15)


def test_inverse_round_trip(rng):
    g = random_invertible(5, rng)
    assert_allclose(g @ inverse(g), np.eye(5), atol=1e-10)


def test_inverse_singular_carries_condition():
    with pytest.raises(SingularMatrixError) as info:
        inverse([[1, 2], [2, 4]])
    assert math.isinf(info.value.condition)


def test_cond():
    assert cond(np.eye(3)) == pytest.approx(1.0)
    assert cond(np.diag([10.0, 1.0])) == pytest.approx(10.0)
    assert math.isinf(cond(np.zeros((2, 2))))


def test_cond_grows_towards_degenerate_basis():
    alphas = np.linspace(0.5, math.pi / 4 - 1e-3, 12)
    conds = [cond(alpha_basis(a).b) for a in alphas]
    assert all(later > earlier for earlier, later in zip(conds, conds[1:]))
    assert conds[-1] > 100 * conds[0]


def test_orthonormalize_drops_dependent_columns():
    cols = np.array([[1, 2, 0], [0, 0, 1], [0, 0, 0]], dtype=complex)
    q = orthonormalize(cols)
    assert q.shape == (3, 2)
    assert_allclose(dagger(q) @ q, np.eye(2), atol=1e-14)


def test_eigenspaces_degenerate_and_defective():
    spaces = eigenspaces(identity(3))
    assert len(spaces) == 1
    assert spaces[0].algebraic == 3 and spaces[0].geometric == 3

    jordan = eigenspaces([[2, 1], [0, 2]])
    assert len(jordan) == 1
    assert jordan[0].defective
    assert_allclose(np.abs(jordan[0].basis[:, 0]), [1, 0], atol=1e-12)
