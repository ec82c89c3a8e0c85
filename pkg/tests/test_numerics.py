import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maslovcount.errors import ContractViolation, SingularMatrix
from maslovcount.numerics import (
    hermitian_eig,
    kernel_dim,
    normalize_phase,
    orthonormalize,
    solve,
    subspace_angle,
    symplectic_j,
    unitary_eig,
    unitary_eigphases,
)


def _random_matrix(seed: int, rows: int, cols: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def test_symplectic_j_structure():
    j = symplectic_j(2)
    assert j.shape == (4, 4)
    assert np.allclose(j @ j, -np.eye(4))
    assert np.allclose(j.T, -j)
    assert j[2, 0] == 1.0 and j[0, 2] == -1.0


def test_symplectic_j_rejects_zero():
    with pytest.raises(ContractViolation):
        symplectic_j(0)


@given(st.integers(0, 10_000), st.integers(1, 3))
@settings(max_examples=40, deadline=None)
def test_orthonormalize_keeps_span_and_positive_diagonal(seed, n):
    f = _random_matrix(seed, 2 * n, n)
    q = orthonormalize(f)
    assert np.allclose(q.conj().T @ q, np.eye(n), atol=1e-12)
    assert subspace_angle(q, f) < 1e-10
    r = q.conj().T @ f
    assert np.all(np.abs(np.diag(r).imag) < 1e-10)
    assert np.all(np.diag(r).real > 0)


def test_orthonormalize_is_unique_under_column_mixing():
    f = _random_matrix(3, 4, 2)
    upper = np.array([[2.0, 1.0 - 1j], [0.0, 0.5]])
    assert np.allclose(orthonormalize(f), orthonormalize(f @ upper), atol=1e-12)


def test_kernel_dim_counts_small_singular_values():
    m = np.diag([1.0, 1e-12, 0.0])
    assert kernel_dim(m, 1e-8) == 2
    assert kernel_dim(np.eye(3), 1e-8) == 0
    assert kernel_dim(np.ones((2, 3)), 1e-8) == 2


def test_kernel_dim_rejects_nonpositive_tolerance():
    with pytest.raises(ContractViolation):
        kernel_dim(np.eye(2), 0.0)


def test_hermitian_eig_sorted_and_rejects_non_hermitian():
    a = _random_matrix(5, 3, 3)
    h = a + a.conj().T
    values, vectors = hermitian_eig(h)
    assert np.all(np.diff(values) >= 0)
    assert np.allclose(h @ vectors, vectors * values, atol=1e-10)
    with pytest.raises(ContractViolation):
        hermitian_eig(a)


def test_unitary_eig_phases_in_range():
    q, _ = np.linalg.qr(_random_matrix(7, 4, 4))
    phases, vectors = unitary_eig(q)
    assert np.all(phases >= -np.pi) and np.all(phases <= np.pi)
    assert np.allclose(q @ vectors, vectors * np.exp(1j * phases), atol=1e-10)
    assert np.all(np.diff(unitary_eigphases(q)) >= 0)


def test_unitary_eig_rejects_non_unitary():
    with pytest.raises(ContractViolation):
        unitary_eig(2.0 * np.eye(2))


def test_solve_and_singular_detection():
    a = _random_matrix(9, 3, 3)
    b = _random_matrix(10, 3, 2)
    assert np.allclose(a @ solve(a, b), b)
    with pytest.raises(SingularMatrix):
        solve(np.ones((2, 2)), np.eye(2))
    with pytest.raises(ContractViolation):
        solve(np.eye(2), np.ones((3, 1)))


def test_normalize_phase():
    v = normalize_phase(np.array([1j, 1j]))
    assert np.isclose(np.linalg.norm(v), 1.0)
    assert np.isclose(v[np.argmax(np.abs(v))].imag, 0.0)
    with pytest.raises(ContractViolation):
        normalize_phase(np.zeros(2))


def test_subspace_angle():
    e1 = np.array([[1.0], [0.0]])
    e2 = np.array([[0.0], [1.0]])
    assert subspace_angle(e1, 3.0 * e1) < 1e-14
    assert np.isclose(subspace_angle(e1, e2), np.pi / 2)
