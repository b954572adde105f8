"""Reference implementations that share no code with the package under test."""

from itertools import product

import numpy as np
from scipy.linalg import expm, sqrtm

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.array([[1, 0], [0, -1]], dtype=complex)


def taylor_expm(a, terms=60):
    """exp(a) by a truncated power series (small-norm inputs only)."""
    out = np.eye(len(a), dtype=complex)
    term = np.eye(len(a), dtype=complex)
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    return out


def kron_all(ops):
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def two_site(op_a, op_b, n, a, b):
    ops = [I2] * n
    ops[a] = op_a
    ops[b] = op_b
    return kron_all(ops)


def pair_hamiltonian(n, a, b, kind):
    if kind == "XX":
        return two_site(X, X, n, a, b) + two_site(Y, Y, n, a, b)
    if kind == "XXX":
        return two_site(X, X, n, a, b) + two_site(Y, Y, n, a, b) + two_site(Z, Z, n, a, b)
    if kind == "Ising":
        return two_site(X, X, n, a, b)
    raise ValueError(kind)


def full_propagator(pairs, n, kind, eta):
    h = sum((pair_hamiltonian(n, a, b, kind) for a, b in pairs), np.zeros((1 << n, 1 << n), complex))
    return expm(-1j * eta * h)


def ket(bits):
    e = {"0": np.array([1, 0], complex), "1": np.array([0, 1], complex)}
    out = np.array([1.0 + 0j])
    for b in bits:
        out = np.kron(out, e[b])
    return out


def excitation_ket(n, k):
    return ket("".join("1" if j == k else "0" for j in range(n)))


def adjacency2(pairs, n):
    h = np.zeros((n, n))
    for a, b in pairs:
        h[a, b] = h[b, a] = 2.0
    return h


def wootters_nested(rho):
    """Concurrence from the eigenvalues of sqrt(sqrt(rho) rho~ sqrt(rho))."""
    yy = np.kron(Y, Y)
    tilde = yy @ rho.conj() @ yy
    s = sqrtm(rho)
    lam = np.sort(np.real(np.linalg.eigvals(sqrtm(s @ tilde @ s))))[::-1]
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


def reduce_pair(psi, n, a, b):
    """Two-qubit reduced state by explicit summation over the other bits."""
    rho = np.zeros((4, 4), complex)
    others = [q for q in range(n) if q not in (a, b)]
    for rest in product("01", repeat=len(others)):
        for i, (x, y) in enumerate(product("01", repeat=2)):
            for j, (u, v) in enumerate(product("01", repeat=2)):
                bi, bj = ["0"] * n, ["0"] * n
                bi[a], bi[b], bj[a], bj[b] = x, y, u, v
                for q, r in zip(others, rest):
                    bi[q] = bj[q] = r
                rho[i, j] += psi[int("".join(bi), 2)] * np.conj(psi[int("".join(bj), 2)])
    return rho


# ------------------------------------------------------------------ lattice gas

def hop(sites, L, k, d):
    """Brute-force hop rule on a list of sites; returns a new list."""
    target = (sites[k] + (1 if d else -1)) % L
    if target in sites:
        return list(sites)
    out = list(sites)
    out[k] = target
    return out


def neighbour_pairs(sites, L):
    n = len(sites)
    pairs = set()
    for i in range(n):
        for j in range(i + 1, n):
            if (sites[i] - sites[j]) % L in (1, L - 1):
                pairs.add((i, j))
    return sorted(pairs)


def exact_ensemble_density(sites0, L, eta, T, label=0):
    """Exact average of |psi><psi| over all (2N)^T move histories, for t = 0..T."""
    n = len(sites0)
    psi0 = np.zeros(n, complex)
    psi0[label] = 1.0
    out = []
    for t in range(T + 1):
        rho = np.zeros((n, n), complex)
        for moves in product(range(2 * n), repeat=t):
            sites, psi = list(sites0), psi0
            for m in moves:
                sites = hop(sites, L, m // 2, m % 2)
                psi = expm(-1j * eta * adjacency2(neighbour_pairs(sites, L), n)) @ psi
            rho += np.outer(psi, psi.conj())
        out.append(rho / (2 * n) ** t)
    return out
