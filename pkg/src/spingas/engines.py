"""Quantum register evolution: single-excitation subspace and full Hilbert space.

Basis conventions: in the full space qubit 0 is the most significant bit and
|0> is the sigma_z = +1 state. The subspace basis vector for particle k is the
computational state with a single 1 on qubit k.

Every step method takes a ``count`` so that ``count`` consecutive steps under the
same interaction pairs are applied as one exact exponential exp(-i eta count H).
"""

from __future__ import annotations

import math
from collections import defaultdict
from enum import Enum
from functools import lru_cache

import numpy as np

from . import kernels
from .classical import Pair, normalize_pairs
from .errors import CapacityError, InvalidInputError
from .linalg import unitary_exponential

FULL_CAP = 12
FULL_DENSITY_CAP = 10


class Coupling(str, Enum):
    XX = "XX"
    ISING = "Ising"
    XXX = "XXX"

    @classmethod
    def parse(cls, text: str) -> "Coupling":
        for c in cls:
            if c.value.lower() == str(text).strip().lower():
                return c
        raise InvalidInputError(f"unknown coupling {text!r}; expected XX, Ising or XXX")


def _pairs(event_or_pairs) -> tuple[Pair, ...]:
    pairs = getattr(event_or_pairs, "pairs", event_or_pairs)
    return normalize_pairs(pairs)


# ------------------------------------------------------------------ subspace engine

def subspace_hamiltonian(event_or_pairs, n: int) -> np.ndarray:
    """Twice the adjacency matrix of the coupled pairs."""
    h = np.zeros((n, n))
    for a, b in _pairs(event_or_pairs):
        if b >= n:
            raise InvalidInputError(f"pair ({a}, {b}) outside {n} particles")
        h[a, b] = h[b, a] = 2.0
    return h


def components(pairs, n: int):
    """Connected components of the pair graph as ``(order, kind, local_edges)``.

    Paths are listed from their smaller endpoint, rings from their smallest label
    towards its smaller neighbour; other graphs in ascending label order.
    """
    adj = defaultdict(set)
    for a, b in pairs:
        adj[a].add(b)
        adj[b].add(a)
    seen = set()
    out = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp, stack = [], [start]
        seen.add(start)
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        m = len(comp)
        edges = sum(len(adj[u]) for u in comp) // 2
        degs = [len(adj[u]) for u in comp]
        if edges == m - 1 and max(degs) <= 2:
            first = min(u for u in comp if len(adj[u]) == 1)
            out.append((_walk(adj, first, None), "path", None))
        elif edges == m and all(d == 2 for d in degs):
            first = min(comp)
            out.append((_walk(adj, first, min(adj[first])), "ring", None))
        else:
            order = sorted(comp)
            pos = {u: i for i, u in enumerate(order)}
            local = tuple(sorted((pos[a], pos[b]) for a, b in pairs if a in pos))
            out.append((np.array(order, dtype=np.int64), "graph", local))
    return out


def _walk(adj, first, second):
    order = [first]
    prev, cur = None, first
    if second is not None:
        prev, cur = first, second
        order.append(cur)
    while True:
        nxt = [v for v in adj[cur] if v != prev and v != first]
        if not nxt:
            break
        prev, cur = cur, nxt[0]
        order.append(cur)
    return np.array(order, dtype=np.int64)


@lru_cache(maxsize=4096)
def block_eigensystem(kind: str, m: int, local_edges=None):
    """Eigenvectors (real, C-contiguous) and eigenvalues of twice the adjacency matrix."""
    a = np.zeros((m, m))
    if kind == "path":
        edges = [(i, i + 1) for i in range(m - 1)]
    elif kind == "ring":
        edges = [(i, (i + 1) % m) for i in range(m)]
    else:
        edges = local_edges
    for i, j in edges:
        a[i, j] = a[j, i] = 2.0
    lam, vecs = np.linalg.eigh(a)
    vecs = np.ascontiguousarray(vecs)
    vecs.setflags(write=False)
    lam.setflags(write=False)
    return vecs, lam


@lru_cache(maxsize=16)
def lattice_eigen_tables(n: int):
    """Padded path/ring eigensystems for the compiled lattice kernel."""
    path_vecs = np.zeros((n + 1, n, n))
    path_lam = np.zeros((n + 1, n))
    for m in range(2, n + 1):
        v, w = block_eigensystem("path", m)
        path_vecs[m, :m, :m] = v
        path_lam[m, :m] = w
    ring_vecs = np.zeros((n, n))
    ring_lam = np.zeros(n)
    if n >= 3:
        ring_vecs[:], ring_lam[:] = block_eigensystem("ring", n)
    return path_vecs, path_lam, ring_vecs, ring_lam


def apply_subspace(psi: np.ndarray, pairs, eta: float, count: int = 1) -> None:
    """In-place ``psi <- exp(-i eta count H) psi``; ``pairs`` must be normalized."""
    view = psi.view(np.float64)
    theta = eta * count
    if theta == 0.0:
        return
    for order, kind, local in components(pairs, len(psi)):
        vecs, lam = block_eigensystem(kind, len(order), local)
        kernels.apply_eig_block(view, order, vecs, lam, theta)


def subspace_step(state, event_or_pairs, eta: float, count: int = 1) -> np.ndarray:
    """One (or ``count``) steps of exp(-i eta H) with H twice the adjacency matrix."""
    psi = np.array(state, dtype=np.complex128)
    pairs = _pairs(event_or_pairs)
    if any(b >= len(psi) for _, b in pairs):
        raise InvalidInputError("event refers to particles outside the state")
    apply_subspace(psi, pairs, eta, count)
    return psi


def excitation_state(n: int, k: int) -> np.ndarray:
    """Subspace amplitudes of the state with qubit ``k`` (0-based) in |1>."""
    if not 0 <= k < n:
        raise InvalidInputError(f"particle {k} outside 0..{n - 1}")
    psi = np.zeros(n, dtype=np.complex128)
    psi[k] = 1.0
    return psi


# ------------------------------------------------------------------ full engine

def check_capacity(n: int, cap: int = FULL_CAP) -> None:
    if n > cap:
        raise CapacityError(f"full-space engine limited to {cap} qubits, got {n}")


def _bit(n: int, q: int) -> int:
    return 1 << (n - 1 - q)


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]])
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def pair_hamiltonian(kind: Coupling) -> np.ndarray:
    """Two-qubit generator in the basis |00>, |01>, |10>, |11>."""
    kind = Coupling(kind)
    h = np.kron(PAULI_X, PAULI_X)
    if kind is not Coupling.ISING:
        h = h + np.kron(PAULI_Y, PAULI_Y)
    if kind is Coupling.XXX:
        h = h + np.kron(PAULI_Z, PAULI_Z)
    return h


@lru_cache(maxsize=64)
def _two_qubit_gate(kind: Coupling, eta: float) -> np.ndarray:
    g = unitary_exponential(pair_hamiltonian(kind), eta)
    g.setflags(write=False)
    return g


def two_qubit_gate(kind: Coupling, eta: float) -> np.ndarray:
    """exp(-i eta h) for the pair generator ``h`` of ``kind``."""
    return _two_qubit_gate(Coupling(kind), float(eta))


def full_hamiltonian(pairs, n: int, kind: Coupling) -> np.ndarray:
    """Dense real 2**n x 2**n sum of the pair generators."""
    check_capacity(n)
    kind = Coupling(kind)
    dim = 1 << n
    idx = np.arange(dim)
    h = np.zeros((dim, dim))
    for a, b in _pairs(pairs):
        mask = _bit(n, a) | _bit(n, b)
        differ = ((idx >> (n - 1 - a)) & 1) != ((idx >> (n - 1 - b)) & 1)
        if kind is Coupling.ISING:
            h[idx ^ mask, idx] += 1.0
            continue
        h[idx[differ] ^ mask, idx[differ]] += 2.0
        if kind is Coupling.XXX:
            h[idx, idx] += np.where(differ, -1.0, 1.0)
    return h


@lru_cache(maxsize=256)
def _full_eigensystem(pairs, n: int, kind: Coupling):
    lam, vecs = np.linalg.eigh(full_hamiltonian(pairs, n, kind))
    return np.ascontiguousarray(vecs), lam


def _apply_pair_gate(psi: np.ndarray, gate: np.ndarray, n: int, a: int, b: int) -> np.ndarray:
    t = psi.reshape((2,) * n)
    t = np.tensordot(gate.reshape(2, 2, 2, 2), t, axes=([2, 3], [a, b]))
    return np.moveaxis(t, [0, 1], [a, b]).reshape(-1)


def apply_full(psi: np.ndarray, pairs, kind: Coupling, eta: float, count: int = 1) -> np.ndarray:
    """Full-space step; returns the new state (Ising updates ``psi`` in place)."""
    n = len(psi).bit_length() - 1
    theta = eta * count
    if not pairs or theta == 0.0:
        return psi
    if kind is Coupling.ISING:
        # pairwise sigma_x sigma_x terms commute: the product is the exponential of the sum
        c, s = math.cos(theta), math.sin(theta)
        view = psi.view(np.float64)
        for a, b in pairs:
            kernels.ising_apply_pair(view, _bit(n, a) | _bit(n, b), c, s)
        return psi
    if len(pairs) == 1:
        (a, b), = pairs
        return _apply_pair_gate(psi, two_qubit_gate(kind, theta), n, a, b)
    vecs, lam = _full_eigensystem(tuple(pairs), n, kind)
    return vecs @ (np.exp(-1j * theta * lam) * (vecs.T @ psi))


def full_step(state, event_or_pairs, kind, eta: float, count: int = 1) -> np.ndarray:
    psi = np.array(state, dtype=np.complex128)
    n = len(psi).bit_length() - 1
    if 1 << n != len(psi):
        raise InvalidInputError("full state length is not a power of two")
    check_capacity(n)
    pairs = _pairs(event_or_pairs)
    if any(b >= n for _, b in pairs):
        raise InvalidInputError("event refers to qubits outside the state")
    return apply_full(psi, pairs, Coupling(kind), eta, count)


def full_step_xx_or_xxx(state, event_or_pairs, kind, eta: float) -> np.ndarray:
    kind = Coupling(kind)
    if kind is Coupling.ISING:
        raise InvalidInputError("use full_step_ising for the Ising coupling")
    return full_step(state, event_or_pairs, kind, eta)


def full_step_ising(state, event_or_pairs, eta: float) -> np.ndarray:
    return full_step(state, event_or_pairs, Coupling.ISING, eta)


def basis_state(bits: str) -> np.ndarray:
    """Computational basis state from a bit string, qubit 0 first."""
    bits = bits.strip()
    if not bits or set(bits) - {"0", "1"}:
        raise InvalidInputError(f"invalid bit string {bits!r}")
    check_capacity(len(bits))
    psi = np.zeros(1 << len(bits), dtype=np.complex128)
    psi[int(bits, 2)] = 1.0
    return psi


def superposition_state(n: int, c0: complex, c1: complex) -> np.ndarray:
    """c0 |00...0> + c1 |10...0> in the full space."""
    check_capacity(n)
    if abs(abs(c0) ** 2 + abs(c1) ** 2 - 1.0) > 1e-10:
        raise InvalidInputError("superposition coefficients are not normalized")
    psi = np.zeros(1 << n, dtype=np.complex128)
    psi[0] = c0
    psi[_bit(n, 0)] = c1
    return psi


def embed_subspace(state) -> np.ndarray:
    amps = np.asarray(state, dtype=np.complex128)
    n = len(amps)
    check_capacity(n)
    psi = np.zeros(1 << n, dtype=np.complex128)
    psi[[_bit(n, k) for k in range(n)]] = amps
    return psi


def project_subspace(state) -> tuple[np.ndarray, float]:
    """Single-excitation amplitudes and the leaked weight ``1 - |projection|^2``."""
    psi = np.asarray(state, dtype=np.complex128)
    n = len(psi).bit_length() - 1
    amps = psi[[_bit(n, k) for k in range(n)]].copy()
    return amps, float(1.0 - np.vdot(amps, amps).real)


def hamming_weights(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    w = np.zeros(1 << n, dtype=np.int64)
    for q in range(n):
        w += (idx >> q) & 1
    return w


def parity_populations(state) -> tuple[float, float]:
    """Total weight on even and odd Hamming-weight basis vectors."""
    psi = np.asarray(state)
    n = len(psi).bit_length() - 1
    p = np.abs(psi) ** 2
    odd = (hamming_weights(n) & 1).astype(bool)
    return float(p[~odd].sum()), float(p[odd].sum())
