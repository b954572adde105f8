"""Dense complex linear algebra for subspace (N <= ~200) and full (2**n <= 4096) matrices."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError, PSDViolationError

HERMITIAN_ATOL = 1e-12
PSD_CLIP = 1e-9


def _as_square(m) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {m.shape}")
    return m


def check_hermitian(m, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    m = _as_square(m)
    if m.size and np.max(np.abs(m - m.conj().T)) > atol:
        raise InvalidInputError("matrix is not Hermitian within tolerance")
    return m


def hermitian_eigendecomposition(m, atol: float = HERMITIAN_ATOL):
    """Return ``(eigenvalues, eigenvectors)`` with eigenvalues ascending.

    ``m == V @ diag(w) @ V.conj().T``. Raises InvalidInputError if ``m``
    deviates from Hermiticity by more than ``atol``.
    """
    m = check_hermitian(m, atol)
    return np.linalg.eigh(m)


def unitary_exponential(h, theta: float) -> np.ndarray:
    """exp(-i * theta * h) for Hermitian ``h``."""
    w, v = hermitian_eigendecomposition(h)
    return (v * np.exp(-1j * theta * w)) @ v.conj().T


def _num_qubits(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise InvalidInputError(f"dimension {dim} is not a power of two")
    return n


def partial_trace(rho, keep) -> np.ndarray:
    """Reduced density matrix on the qubits in ``keep`` (0-based, qubit 0 most significant).

    The kept qubits appear in ascending order in the result.
    """
    rho = _as_square(rho)
    n = _num_qubits(rho.shape[0])
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise InvalidInputError(f"qubit indices {keep} out of range for {n} qubits")
    drop = [k for k in range(n) if k not in keep]
    t = rho.reshape((2,) * (2 * n))
    # trace pairs from the highest index down so remaining axis numbers stay valid
    nleft = n
    for q in reversed(drop):
        t = np.trace(t, axis1=q, axis2=q + nleft)
        nleft -= 1
    d = 1 << len(keep)
    return t.reshape(d, d)


def _clipped_spectrum(w: np.ndarray) -> np.ndarray:
    if w.size and w.min() < -PSD_CLIP:
        raise PSDViolationError(f"eigenvalue {w.min():.3e} below -{PSD_CLIP:g}")
    return np.clip(w, 0.0, 1.0)


def shannon_entropy(p) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return max(0.0, float(-np.sum(p * np.log2(p))))


def von_neumann_entropy(rho) -> float:
    """-Tr rho log2 rho; eigenvalues in [-1e-9, 0) are clipped to zero."""
    rho = check_hermitian(rho, atol=1e-9)
    w = np.linalg.eigvalsh(rho)
    return shannon_entropy(_clipped_spectrum(w))


def diagonal_shannon_entropy(rho) -> float:
    """Shannon entropy of the diagonal of ``rho`` in its stored basis."""
    rho = _as_square(rho)
    d = np.real(np.diagonal(rho))
    return shannon_entropy(_clipped_spectrum(d))


def is_density_matrix(rho, atol: float = 1e-9) -> bool:
    rho = _as_square(rho)
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        return False
    if abs(np.trace(rho).real - 1.0) > atol:
        return False
    return bool(np.linalg.eigvalsh(rho).min() >= -atol)
