"""Seeded random matrices and states for property checks and reproduction runs."""
from __future__ import annotations

from typing import Tuple

import numpy as np
import numpy.typing as npt

from ptqm.linalg import ComplexMatrix, ComplexVector, cond, dagger

FloatArray = npt.NDArray[np.float64]


def ginibre(dim: int, rng: np.random.Generator) -> ComplexMatrix:
    return (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)


def random_unitary(dim: int, rng: np.random.Generator) -> ComplexMatrix:
    q, r = np.linalg.qr(ginibre(dim, rng))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_hermitian(dim: int, rng: np.random.Generator) -> Tuple[ComplexMatrix, FloatArray]:
    q = random_unitary(dim, rng)
    d = rng.uniform(-5.0, 5.0, size=dim)
    return q @ np.diag(d) @ dagger(q), d


def random_invertible(dim: int, rng: np.random.Generator, max_cond: float = 1e3) -> ComplexMatrix:
    while True:
        g = ginibre(dim, rng) + 0.5 * np.eye(dim)
        if cond(g) <= max_cond:
            return g


def random_acceptable(
    dim: int, rng: np.random.Generator, max_cond: float = 1e3
) -> Tuple[ComplexMatrix, FloatArray, ComplexMatrix]:
    """h = g diag(d) g^-1 with real, well separated d."""
    g = random_invertible(dim, rng, max_cond=max_cond)
    d = np.sort(rng.uniform(-3.0, 3.0, size=dim))
    while dim > 1 and np.min(np.diff(d)) < 1e-2:
        d = np.sort(rng.uniform(-3.0, 3.0, size=dim))
    return g @ np.diag(d) @ np.linalg.inv(g), d, g


def random_state(dim: int, rng: np.random.Generator) -> ComplexVector:
    return rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
