import numpy as np
import pytest
from scipy.linalg import expm

from oracles import taylor_expm
from spingas.errors import InvalidInputError, PSDViolationError
from spingas.linalg import (
    diagonal_shannon_entropy,
    hermitian_eigendecomposition,
    is_density_matrix,
    partial_trace,
    shannon_entropy,
    unitary_exponential,
    von_neumann_entropy,
)


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def random_density(rng, d, rank=None):
    rank = rank or d
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def test_eigendecomposition_diagonal():
    w, v = hermitian_eigendecomposition(np.diag([1.0, 2.0]))
    assert np.allclose(w, [1, 2])
    assert np.allclose(np.abs(v), np.eye(2))


def test_eigendecomposition_two_by_two():
    w, v = hermitian_eigendecomposition(np.array([[0.0, 2.0], [2.0, 0.0]]))
    assert np.allclose(w, [-2, 2])
    # columns (1,-1)/sqrt2 and (1,1)/sqrt2 up to sign
    assert np.isclose(abs(v[:, 0] @ np.array([1, -1]) / np.sqrt(2)), 1)
    assert np.isclose(abs(v[:, 1] @ np.array([1, 1]) / np.sqrt(2)), 1)


def test_eigendecomposition_zero_matrix():
    w, _ = hermitian_eigendecomposition(np.zeros((5, 5)))
    assert np.array_equal(w, np.zeros(5))


def test_eigendecomposition_reconstruction():
    rng = np.random.default_rng(0)
    for d in (1, 3, 17, 64):
        m = random_hermitian(rng, d)
        w, v = hermitian_eigendecomposition(m)
        assert np.all(np.diff(w) >= 0)
        assert np.max(np.abs(m - (v * w) @ v.conj().T)) < 1e-10 * d


def test_eigendecomposition_rejects_non_hermitian():
    with pytest.raises(InvalidInputError):
        hermitian_eigendecomposition(np.array([[0, 1], [0, 0]]))


def test_exponential_zero_angle_is_identity():
    rng = np.random.default_rng(1)
    assert np.allclose(unitary_exponential(random_hermitian(rng, 6), 0.0), np.eye(6), atol=1e-14)


def test_exponential_two_by_two_closed_form():
    eta = 0.37
    h = np.array([[0.0, 2.0], [2.0, 0.0]])
    c, s = np.cos(2 * eta), np.sin(2 * eta)
    expected = np.array([[c, -1j * s], [-1j * s, c]])
    got = unitary_exponential(h, eta)
    assert np.max(np.abs(got - expected)) < 1e-14
    assert np.max(np.abs(taylor_expm(-1j * eta * h) - expected)) < 1e-13


def test_exponential_diagonal():
    got = unitary_exponential(np.diag([0.3, -1.2]), 2.5)
    assert np.allclose(got, np.diag(np.exp(-1j * 2.5 * np.array([0.3, -1.2]))), atol=1e-14)


def test_exponential_matches_scipy_and_is_unitary():
    rng = np.random.default_rng(2)
    for d in (2, 8, 64, 256):
        h = random_hermitian(rng, d)
        u = unitary_exponential(h, 0.7)
        assert np.max(np.abs(u.conj().T @ u - np.eye(d))) < 1e-10
        assert np.max(np.abs(u - expm(-0.7j * h))) < 1e-9
        # exp at -theta is the adjoint
        assert np.max(np.abs(unitary_exponential(h, -0.7) - u.conj().T)) < 1e-10


def test_partial_trace_product_state():
    rho = np.kron(np.diag([1, 0]), np.diag([0, 1])).astype(complex)
    assert np.allclose(partial_trace(rho, [1]), np.diag([0, 1]))
    assert np.allclose(partial_trace(rho, [0]), np.diag([1, 0]))


def test_partial_trace_bell_marginal():
    psi = np.array([0, 1, 1, 0]) / np.sqrt(2)
    assert np.allclose(partial_trace(np.outer(psi, psi), [0]), np.eye(2) / 2)


def test_partial_trace_excitation_three_qubits():
    psi = np.zeros(8)
    psi[0b100] = 1
    red = partial_trace(np.outer(psi, psi), [0, 1])
    expected = np.zeros((4, 4))
    expected[0b10, 0b10] = 1
    assert np.allclose(red, expected)


def test_partial_trace_matches_explicit_sum_and_keeps_trace():
    rng = np.random.default_rng(3)
    n = 4
    rho = random_density(rng, 1 << n)
    red = partial_trace(rho, [1, 3])
    manual = np.zeros((4, 4), complex)
    for i in range(16):
        for j in range(16):
            bi = [(i >> (n - 1 - q)) & 1 for q in range(n)]
            bj = [(j >> (n - 1 - q)) & 1 for q in range(n)]
            if bi[0] == bj[0] and bi[2] == bj[2]:
                manual[bi[1] * 2 + bi[3], bj[1] * 2 + bj[3]] += rho[i, j]
    assert np.max(np.abs(red - manual)) < 1e-14
    for q in range(n):
        assert abs(np.trace(partial_trace(rho, [q])) - 1) < 1e-12


def test_partial_trace_rejects_bad_dimension():
    with pytest.raises(InvalidInputError):
        partial_trace(np.eye(3) / 3, [0])


def test_von_neumann_entropy_examples():
    psi = np.array([1, 1j, 0]) / np.sqrt(2)
    assert von_neumann_entropy(np.outer(psi, psi.conj())) == pytest.approx(0, abs=1e-12)
    assert von_neumann_entropy(np.eye(8) / 8) == pytest.approx(3.0, abs=1e-12)
    assert von_neumann_entropy(np.diag([0.5, 0.25, 0.25])) == pytest.approx(1.5, abs=1e-12)


def test_entropy_clipping_and_psd_violation():
    assert von_neumann_entropy(np.diag([1.0 + 5e-10, -5e-10])) == pytest.approx(0, abs=1e-8)
    with pytest.raises(PSDViolationError):
        von_neumann_entropy(np.diag([1.1, -0.1]))


def test_diagonal_entropy_examples():
    rho = np.diag([0.5, 0.25, 0.25])
    assert diagonal_shannon_entropy(rho) == pytest.approx(von_neumann_entropy(rho), abs=1e-12)
    e0 = np.zeros(4)
    e0[0] = 1
    assert diagonal_shannon_entropy(np.outer(e0, e0)) == 0
    bell = np.array([0, 1, 1, 0]) / np.sqrt(2)
    rho = np.outer(bell, bell)
    assert diagonal_shannon_entropy(rho) == pytest.approx(1.0, abs=1e-12)
    assert von_neumann_entropy(rho) == pytest.approx(0.0, abs=1e-12)


def test_entropy_bounds_and_diagonal_dominance():
    rng = np.random.default_rng(4)
    for d in (2, 5, 16):
        diag = np.diag(rng.dirichlet(np.ones(d)))
        assert diagonal_shannon_entropy(diag) == pytest.approx(von_neumann_entropy(diag), abs=1e-12)
        q, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
        rotated = q @ diag @ q.conj().T
        s = von_neumann_entropy(rotated)
        assert 0 <= s <= np.log2(d) + 1e-12
        assert diagonal_shannon_entropy(rotated) >= s - 1e-9
        assert diagonal_shannon_entropy(rotated) > s + 1e-6


def test_shannon_entropy_zero_convention():
    assert shannon_entropy([1.0, 0.0, 0.0]) == 0.0
    assert shannon_entropy([0.5, 0.5]) == pytest.approx(1.0)


def test_is_density_matrix():
    rng = np.random.default_rng(5)
    assert is_density_matrix(random_density(rng, 4))
    assert not is_density_matrix(np.diag([0.6, 0.6]))
    assert not is_density_matrix(np.diag([1.2, -0.2]))
