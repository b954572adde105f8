"""Measured quantities: excitation probabilities, inhomogeneity, concurrences, entropies."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError, PSDViolationError
from .linalg import PSD_CLIP, partial_trace, shannon_entropy

SIGMA_YY = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex)


def single_particle_probs(state) -> np.ndarray:
    """Probability of finding each particle's qubit in |1>.

    Accepts subspace amplitudes (1-D) or a subspace density matrix (2-D).
    """
    x = np.asarray(state)
    if x.ndim == 1:
        return np.abs(x) ** 2
    if x.ndim == 2:
        return np.real(np.diagonal(x)).copy()
    raise InvalidInputError("expected a state vector or a density matrix")


def full_single_particle_probs(state) -> np.ndarray:
    """Same as :func:`single_particle_probs` for full-space vectors or density matrices."""
    x = np.asarray(state)
    diag = np.abs(x) ** 2 if x.ndim == 1 else np.real(np.diagonal(x))
    n = len(diag).bit_length() - 1
    idx = np.arange(len(diag))
    return np.array([diag[(idx >> (n - 1 - q)) & 1 == 1].sum() for q in range(n)])


def inhomogeneity(p) -> float:
    """Population variance of the probabilities over particles."""
    return float(np.var(np.asarray(p, dtype=float)))


def wootters_concurrence(rho2) -> float:
    """Concurrence of a two-qubit density matrix (basis |00>, |01>, |10>, |11>).

    The lambdas (square roots of the eigenvalues of rho rho~) are obtained as
    the singular values of W^T (sy x sy) W with rho = W W^T*; this avoids
    taking square roots of round-off sized eigenvalues.
    """
    rho = np.asarray(rho2, dtype=complex)
    if rho.shape != (4, 4):
        raise InvalidInputError(f"expected a 4x4 density matrix, got {rho.shape}")
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    if w.min() < -PSD_CLIP:
        raise PSDViolationError(f"two-qubit state has eigenvalue {w.min():.3e}")
    half = v * np.sqrt(np.clip(w, 0.0, None))
    lam = np.linalg.svd(half.T @ SIGMA_YY @ half, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def subspace_concurrence(rho, k: int, kp: int) -> float:
    """Concurrence of qubits ``k`` and ``kp`` from a subspace density matrix or amplitudes."""
    if k == kp:
        raise InvalidInputError("concurrence needs two distinct qubits")
    x = np.asarray(rho)
    if x.ndim == 1:
        return float(2 * abs(x[k] * np.conj(x[kp])))
    return float(2 * abs(x[k, kp]))


def total_concurrence(rho) -> float:
    """Sum of subspace concurrences over all unordered pairs."""
    x = np.asarray(rho)
    if x.ndim == 1:
        a = np.abs(x)
        return float(a.sum() ** 2 - np.sum(a * a))
    a = np.abs(x)
    return float(a.sum() - np.trace(a))


def concurrence_table(rho) -> np.ndarray:
    """Symmetric matrix of subspace pair concurrences with zero diagonal."""
    x = np.asarray(rho)
    if x.ndim == 1:
        a = np.abs(x)
        c = 2 * np.outer(a, a)
    else:
        a = np.abs(x)
        c = a + a.T
    np.fill_diagonal(c, 0.0)
    return c


def pure_pair_state(psi, a: int, b: int) -> np.ndarray:
    """Reduced density matrix of qubits ``a < b`` of a pure full-space state."""
    psi = np.asarray(psi, dtype=complex)
    n = len(psi).bit_length() - 1
    t = np.moveaxis(psi.reshape((2,) * n), [a, b], [0, 1]).reshape(4, -1)
    return t @ t.conj().T


def full_concurrence_table(rho) -> np.ndarray:
    """Pair concurrences of a full-space state via partial traces and the Wootters formula."""
    x = np.asarray(rho)
    n = x.shape[0].bit_length() - 1
    c = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            red = pure_pair_state(x, a, b) if x.ndim == 1 else partial_trace(x, [a, b])
            c[a, b] = c[b, a] = wootters_concurrence(red)
    return c


def complete_subspace_mixture(n: int) -> np.ndarray:
    """Equal-weight mixture of the n single-excitation basis states."""
    return np.eye(n, dtype=complex) / n


def stationary_entropy_prediction(c0: complex, c1: complex, n: int) -> float:
    """Stationary entropy (bits) for c0 |vacuum> + c1 |one excitation> under XX mixing."""
    w0, w1 = abs(c0) ** 2, abs(c1) ** 2
    if abs(w0 + w1 - 1.0) > 1e-10:
        raise InvalidInputError("coefficients are not normalized")
    return shannon_entropy([w0] + [w1 / n] * n)
