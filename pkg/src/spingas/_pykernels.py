"""Pure-Python/numpy reference versions of the compiled kernels.

Same signatures and in-place semantics as ``_ckernels``; complex vectors are
interleaved float64 views. Selected automatically when the extension is not
built, or forced with ``SPINGAS_PURE_PYTHON=1``.
"""

from __future__ import annotations

import math

import numpy as np


def _c(view):
    return view.view(np.complex128)


def apply_eig_block(psi, idx, vecs, lam, theta):
    if len(idx) < 2:
        return
    z = _c(psi)
    m = len(idx)
    v = vecs[:m, :m]
    w = v.T @ z[idx]
    w *= np.cos(theta * lam[:m]) - 1j * np.sin(theta * lam[:m])
    z[idx] = v @ w


def ising_apply_pair(psi, mask, c, s):
    z = _c(psi)
    perm = np.arange(len(z)) ^ mask
    z[:] = c * z - 1j * s * z[perm]


def _target(occ, sites, k, d):
    L = len(occ)
    target = sites[k] + 1 if d else sites[k] - 1
    if target == L:
        return 0
    if target < 0:
        return L - 1
    return target


def _hop_kind(occ, sites, k, d):
    """0: blocked, 1: hop keeps the neighbour-pair set, 2: hop changes it."""
    L = len(occ)
    x = int(sites[k])
    step = 1 if d else L - 1
    y = (x + step) % L
    if occ[y] >= 0:
        return 0
    behind = occ[(x + L - step) % L]
    far = (y + step) % L
    ahead = -1 if far == x else occ[far]
    return 2 if behind != ahead else 1


def _hop(occ, sites, k, d):
    target = _target(occ, sites, k, d)
    if occ[target] >= 0:
        return False
    occ[sites[k]] = -1
    occ[target] = k
    sites[k] = target
    return True


def lattice_walk(occ, sites, choices, dirs, moved):
    count = 0
    for t in range(len(choices)):
        ok = _hop(occ, sites, int(choices[t]), int(dirs[t]))
        moved[t] = ok
        count += ok
    return count


def xx_blocks(occ, n):
    """Canonical components of the occupancy graph as ``(order, is_ring)`` pairs."""
    L = len(occ)
    if n == L:
        if n == 2:
            return [(np.array(sorted(int(x) for x in occ), dtype=np.int64), False)]
        if n < 2:
            return []
        p = int(np.argmin(occ))
        step = 1 if occ[(p + 1) % L] < occ[(p - 1) % L] else L - 1
        order = np.array([occ[(p + j * step) % L] for j in range(L)], dtype=np.int64)
        return [(order, True)]
    e = int(np.flatnonzero(occ < 0)[0])
    blocks = []
    run = []
    for j in range(1, L + 1):
        l = (e + j) % L
        if occ[l] >= 0:
            run.append(int(occ[l]))
            continue
        if len(run) >= 2:
            if run[0] > run[-1]:
                run.reverse()
            blocks.append((np.array(run, dtype=np.int64), False))
        run = []
    return blocks


def _xx_flush(psi, occ, n, theta, path_vecs, path_lam, ring_vecs, ring_lam):
    for order, ring in xx_blocks(occ, n):
        m = len(order)
        if ring:
            apply_eig_block(psi, order, ring_vecs, ring_lam, theta)
        else:
            apply_eig_block(psi, order, path_vecs[m], path_lam[m], theta)


def _drive(psi, occ, sites, choices, dirs, eta, sample_steps, out, flush):
    """Shared lattice driver: consecutive steps with one configuration are merged."""
    jsamp = 0
    S = len(sample_steps)
    while jsamp < S and sample_steps[jsamp] == 0:
        out[jsamp] = psi
        jsamp += 1
    pending = 0
    for t in range(len(choices)):
        k, d = int(choices[t]), int(dirs[t])
        kind = _hop_kind(occ, sites, k, d)
        if kind:
            if kind == 2 and pending:
                flush(eta * pending)
                pending = 0
            _hop(occ, sites, k, d)
        pending += 1
        if jsamp < S and sample_steps[jsamp] == t + 1:
            flush(eta * pending)
            pending = 0
            out[jsamp] = psi
            jsamp += 1
    if pending:
        flush(eta * pending)


def lattice_xx_run(psi, occ, sites, choices, dirs, eta, path_vecs, path_lam, ring_vecs,
                   ring_lam, sample_steps, out):
    n = len(sites)
    _drive(psi, occ, sites, choices, dirs, eta, sample_steps, out,
           lambda theta: _xx_flush(psi, occ, n, theta, path_vecs, path_lam, ring_vecs, ring_lam))


def ising_pairs(occ):
    L = len(occ)
    pairs = set()
    for l in range(L):
        a, b = int(occ[l]), int(occ[(l + 1) % L])
        if a >= 0 and b >= 0 and a != b:
            pairs.add((min(a, b), max(a, b)))
    return sorted(pairs)


def _ising_flush(psi, occ, n, theta):
    pairs = ising_pairs(occ)
    if not pairs:
        return
    c, s = math.cos(theta), math.sin(theta)
    for a, b in pairs:
        ising_apply_pair(psi, (1 << (n - 1 - a)) | (1 << (n - 1 - b)), c, s)


def lattice_ising_run(psi, occ, sites, choices, dirs, eta, sample_steps, out):
    n = len(sites)
    _drive(psi, occ, sites, choices, dirs, eta, sample_steps, out,
           lambda theta: _ising_flush(psi, occ, n, theta))


# ---------------------------------------------------------------- billiard

def _pair_times(pos, vel, b, d2):
    r = pos[b] - pos
    v = vel[b] - vel
    bij = r[:, 0] * v[:, 0] + r[:, 1] * v[:, 1] + r[:, 2] * v[:, 2]
    vv = v[:, 0] * v[:, 0] + v[:, 1] * v[:, 1] + v[:, 2] * v[:, 2]
    rr = r[:, 0] * r[:, 0] + r[:, 1] * r[:, 1] + r[:, 2] * r[:, 2]
    with np.errstate(invalid="ignore", divide="ignore"):
        disc = bij * bij - vv * (rr - d2)
        ok = (bij < 0.0) & (disc > 0.0)
        t = np.where(ok, (-bij - np.sqrt(np.where(ok, disc, 0.0))) / np.where(ok, vv, 1.0), np.inf)
    t = np.where(t < 0.0, 0.0, t)
    t[b] = np.inf
    return t


def _wall_time(x, v, lo, hi):
    if v > 0.0:
        t = (hi - x) / v
    elif v < 0.0:
        t = (lo - x) / v
    else:
        return math.inf
    return 0.0 if t < 0.0 else t


def _recompute(pos, vel, b, d2, lo, hi, coltime, partner):
    t = _pair_times(pos, vel, b, d2)
    k = int(np.argmin(t))
    best, who = float(t[k]), (k if t[k] < math.inf else -4)
    for ax in range(3):
        tw = _wall_time(pos[b, ax], vel[b, ax], lo, hi[ax])
        if tw < best:
            best, who = tw, -1 - ax
    coltime[b] = best
    partner[b] = who


def billiard_run(pos, vel, diameter, box, max_pairs, max_events, out_pairs):
    n = pos.shape[0]
    d2 = diameter * diameter
    lo = 0.5 * diameter
    hi = [box[ax] - lo for ax in range(3)]
    coltime = np.empty(n)
    partner = np.empty(n, dtype=np.int64)
    for i in range(n):
        _recompute(pos, vel, i, d2, lo, hi, coltime, partner)
    npairs = nevents = 0
    elapsed = 0.0
    status = 0
    while npairs < max_pairs and nevents < max_events:
        tmin = coltime.min()
        if tmin == math.inf:
            status = 1
            break
        cand = np.flatnonzero(coltime == tmin)
        pairs_first = cand[partner[cand] >= 0]
        i = int(pairs_first[0] if len(pairs_first) else cand[0])
        pos += vel * tmin
        coltime -= tmin
        elapsed += tmin
        who = int(partner[i])
        nevents += 1
        if who < 0:
            ax = -1 - who
            vel[i, ax] = -vel[i, ax]
            pos[i, ax] = lo if vel[i, ax] > 0.0 else hi[ax]
            _recompute(pos, vel, i, d2, lo, hi, coltime, partner)
            for k in np.flatnonzero(partner == i):
                _recompute(pos, vel, int(k), d2, lo, hi, coltime, partner)
            continue
        j = who
        r = pos[i] - pos[j]
        rr = r[0] * r[0] + r[1] * r[1] + r[2] * r[2]
        dist = math.sqrt(rr)
        if dist - diameter > 1e-6 or diameter - dist > 1e-6:
            status = 2
            break
        v = vel[i] - vel[j]
        f = (r[0] * v[0] + r[1] * v[1] + r[2] * v[2]) / rr
        vel[i] = vel[i] - f * r
        vel[j] = vel[j] + f * r
        out_pairs[npairs] = (min(i, j), max(i, j))
        npairs += 1
        _recompute(pos, vel, i, d2, lo, hi, coltime, partner)
        _recompute(pos, vel, j, d2, lo, hi, coltime, partner)
        for k in np.flatnonzero((partner == i) | (partner == j)):
            if k != i and k != j:
                _recompute(pos, vel, int(k), d2, lo, hi, coltime, partner)
    return npairs, nevents, elapsed, status
