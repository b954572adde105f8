# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Mirrors ``_pykernels`` function-for-function.

Complex vectors are passed as interleaved float64 views (re, im, re, im, ...).
"""

import numpy as np
from libc.math cimport sqrt, cos, sin, INFINITY
from libc.stdlib cimport malloc, free

ctypedef long long i64


# ---------------------------------------------------------------- subspace blocks

cdef void _eig_block(double* psi, const i64* idx, Py_ssize_t m,
                     const double* vecs, Py_ssize_t vstride, const double* lam,
                     double theta, double* wre, double* wim) noexcept nogil:
    # psi[idx] <- V diag(exp(-i theta lam)) V^T psi[idx]; V real, row stride vstride
    cdef Py_ssize_t i, j
    cdef double ar, ai, v, c, s, tr, ti
    for j in range(m):
        ar = 0.0
        ai = 0.0
        for i in range(m):
            v = vecs[i * vstride + j]
            ar = ar + v * psi[2 * idx[i]]
            ai = ai + v * psi[2 * idx[i] + 1]
        c = cos(theta * lam[j])
        s = sin(theta * lam[j])
        wre[j] = c * ar + s * ai
        wim[j] = c * ai - s * ar
    for i in range(m):
        tr = 0.0
        ti = 0.0
        for j in range(m):
            v = vecs[i * vstride + j]
            tr = tr + v * wre[j]
            ti = ti + v * wim[j]
        psi[2 * idx[i]] = tr
        psi[2 * idx[i] + 1] = ti


def apply_eig_block(double[::1] psi, const i64[::1] idx, const double[:, ::1] vecs, const double[::1] lam,
                    double theta):
    cdef Py_ssize_t m = idx.shape[0]
    if m < 2:
        return
    cdef double* w = <double*> malloc(2 * m * sizeof(double))
    try:
        _eig_block(&psi[0], &idx[0], m, &vecs[0, 0], vecs.shape[1], &lam[0], theta, w, w + m)
    finally:
        free(w)


# ---------------------------------------------------------------- ising

cdef void _ising_pair(double* psi, Py_ssize_t dim, i64 mask, double c, double s) noexcept nogil:
    # psi <- (c I - i s X_a X_b) psi, X_a X_b flips the bits in mask
    cdef Py_ssize_t i, j
    cdef double ar, ai, br, bi
    for i in range(dim):
        j = i ^ mask
        if j < i:
            continue
        ar = psi[2 * i]
        ai = psi[2 * i + 1]
        br = psi[2 * j]
        bi = psi[2 * j + 1]
        psi[2 * i] = c * ar + s * bi
        psi[2 * i + 1] = c * ai - s * br
        psi[2 * j] = c * br + s * ai
        psi[2 * j + 1] = c * bi - s * ar


def ising_apply_pair(double[::1] psi, i64 mask, double c, double s):
    _ising_pair(&psi[0], psi.shape[0] // 2, mask, c, s)


# ---------------------------------------------------------------- lattice gas

cdef inline bint _hop(i64* occ, i64* sites, i64 L, i64 k, i64 d) noexcept nogil:
    cdef i64 here = sites[k]
    cdef i64 target = here + 1 if d else here - 1
    if target == L:
        target = 0
    elif target < 0:
        target = L - 1
    if occ[target] >= 0:
        return False
    occ[here] = -1
    occ[target] = k
    sites[k] = target
    return True


def lattice_walk(i64[::1] occ, i64[::1] sites, i64[::1] choices, i64[::1] dirs, unsigned char[::1] moved):
    cdef Py_ssize_t t, T = choices.shape[0]
    cdef i64 L = occ.shape[0]
    cdef i64 count = 0
    for t in range(T):
        if _hop(&occ[0], &sites[0], L, choices[t], dirs[t]):
            moved[t] = 1
            count += 1
        else:
            moved[t] = 0
    return count


cdef Py_ssize_t _xx_blocks(const i64* occ, i64 L, i64 n, i64* order, i64* starts, i64* lens,
                           unsigned char* ring) noexcept nogil:
    # canonical components of the occupancy graph: paths start at the smaller endpoint,
    # the saturated ring starts at its smallest label and heads to the smaller neighbour
    cdef Py_ssize_t nb = 0, pos = 0, j, p, m, a, b
    cdef i64 l, e, step, tmp
    ring[0] = 0
    if n == L:
        if n == 2:
            order[0] = occ[0] if occ[0] < occ[1] else occ[1]
            order[1] = occ[1] if occ[0] < occ[1] else occ[0]
            starts[0] = 0
            lens[0] = 2
            return 1
        if n < 2:
            return 0
        p = 0
        for j in range(1, L):
            if occ[j] < occ[p]:
                p = j
        step = 1 if occ[(p + 1) % L] < occ[(p - 1 + L) % L] else L - 1
        for j in range(L):
            order[j] = occ[(p + j * step) % L]
        starts[0] = 0
        lens[0] = L
        ring[0] = 1
        return 1
    e = 0
    while occ[e] >= 0:
        e += 1
    m = 0
    for j in range(1, L + 1):
        l = (e + j) % L
        if occ[l] >= 0:
            order[pos + m] = occ[l]
            m += 1
        else:
            if m >= 2:
                if order[pos] > order[pos + m - 1]:
                    a = pos
                    b = pos + m - 1
                    while a < b:
                        tmp = order[a]
                        order[a] = order[b]
                        order[b] = tmp
                        a += 1
                        b -= 1
                starts[nb] = pos
                lens[nb] = m
                nb += 1
                pos += m
            m = 0
    return nb


cdef inline int _hop_kind(const i64* occ, const i64* sites, i64 L, i64 k, i64 d) noexcept nogil:
    # 0: blocked, 1: hop keeps the neighbour-pair set, 2: hop changes it
    cdef i64 x = sites[k]
    cdef i64 step = 1 if d else L - 1
    cdef i64 y = (x + step) % L
    cdef i64 behind, ahead, far
    if occ[y] >= 0:
        return 0
    behind = occ[(x + L - step) % L]
    far = (y + step) % L
    ahead = -1 if far == x else occ[far]
    return 2 if behind != ahead else 1


cdef void _xx_flush(double* psi, const i64* occ, i64 L, i64 n, double theta,
                    const double* path_vecs, const double* path_lam, const double* ring_vecs,
                    const double* ring_lam, Py_ssize_t vs, i64* order, i64* starts, i64* lens,
                    double* w) noexcept nogil:
    cdef unsigned char ring = 0
    cdef Py_ssize_t nb = _xx_blocks(occ, L, n, order, starts, lens, &ring)
    cdef Py_ssize_t b, m
    for b in range(nb):
        m = lens[b]
        if ring:
            _eig_block(psi, order + starts[b], m, ring_vecs, vs, ring_lam, theta, w, w + m)
        else:
            _eig_block(psi, order + starts[b], m, path_vecs + m * vs * vs, vs,
                       path_lam + m * vs, theta, w, w + m)


def lattice_xx_run(double[::1] psi, i64[::1] occ, i64[::1] sites, const i64[::1] choices,
                   const i64[::1] dirs, double eta, const double[:, :, ::1] path_vecs,
                   const double[:, ::1] path_lam, const double[:, ::1] ring_vecs,
                   const double[::1] ring_lam, const i64[::1] sample_steps, double[:, ::1] out):
    """Single-excitation XX evolution driven by the lattice gas; see ``_pykernels``."""
    cdef Py_ssize_t T = choices.shape[0], S = sample_steps.shape[0]
    cdef i64 L = occ.shape[0], n = sites.shape[0]
    cdef Py_ssize_t t, q, jsamp = 0
    cdef i64 pending = 0
    cdef int kind
    cdef Py_ssize_t vs = path_vecs.shape[2]
    cdef i64* order = <i64*> malloc((n + 1) * sizeof(i64))
    cdef i64* starts = <i64*> malloc((n + 1) * sizeof(i64))
    cdef i64* lens = <i64*> malloc((n + 1) * sizeof(i64))
    cdef double* w = <double*> malloc(2 * (n + 1) * sizeof(double))
    cdef double* p = &psi[0]
    try:
        with nogil:
            while jsamp < S and sample_steps[jsamp] == 0:
                for q in range(2 * n):
                    out[jsamp, q] = p[q]
                jsamp += 1
            for t in range(T):
                kind = _hop_kind(&occ[0], &sites[0], L, choices[t], dirs[t])
                if kind:
                    if kind == 2 and pending > 0:
                        _xx_flush(p, &occ[0], L, n, eta * pending, &path_vecs[0, 0, 0], &path_lam[0, 0],
                                  &ring_vecs[0, 0], &ring_lam[0], vs, order, starts, lens, w)
                        pending = 0
                    _hop(&occ[0], &sites[0], L, choices[t], dirs[t])
                pending += 1
                if jsamp < S and sample_steps[jsamp] == t + 1:
                    _xx_flush(p, &occ[0], L, n, eta * pending, &path_vecs[0, 0, 0], &path_lam[0, 0],
                              &ring_vecs[0, 0], &ring_lam[0], vs, order, starts, lens, w)
                    pending = 0
                    for q in range(2 * n):
                        out[jsamp, q] = p[q]
                    jsamp += 1
            if pending > 0:
                _xx_flush(p, &occ[0], L, n, eta * pending, &path_vecs[0, 0, 0], &path_lam[0, 0],
                          &ring_vecs[0, 0], &ring_lam[0], vs, order, starts, lens, w)
    finally:
        free(order)
        free(starts)
        free(lens)
        free(w)


cdef void _ising_flush(double* psi, Py_ssize_t dim, const i64* occ, i64 L, i64 n, double theta,
                       i64* keys) noexcept nogil:
    cdef Py_ssize_t l, cnt = 0, i, j
    cdef i64 a, b, key, mask
    cdef double c, s
    for l in range(L):
        a = occ[l]
        b = occ[(l + 1) % L]
        if a >= 0 and b >= 0 and a != b:
            key = a * n + b if a < b else b * n + a
            # insertion keeps keys sorted and unique
            i = 0
            while i < cnt and keys[i] < key:
                i += 1
            if i < cnt and keys[i] == key:
                continue
            j = cnt
            while j > i:
                keys[j] = keys[j - 1]
                j -= 1
            keys[i] = key
            cnt += 1
    if cnt == 0:
        return
    c = cos(theta)
    s = sin(theta)
    for i in range(cnt):
        a = keys[i] // n
        b = keys[i] % n
        mask = (<i64> 1 << (n - 1 - a)) | (<i64> 1 << (n - 1 - b))
        _ising_pair(psi, dim, mask, c, s)


def lattice_ising_run(double[::1] psi, i64[::1] occ, i64[::1] sites, const i64[::1] choices,
                      const i64[::1] dirs, double eta, const i64[::1] sample_steps, double[:, ::1] out):
    """Full-space Ising evolution driven by the lattice gas; see ``_pykernels``."""
    cdef Py_ssize_t T = choices.shape[0], S = sample_steps.shape[0]
    cdef i64 L = occ.shape[0], n = sites.shape[0]
    cdef Py_ssize_t dim = psi.shape[0] // 2
    cdef Py_ssize_t t, q, jsamp = 0
    cdef i64 pending = 0
    cdef int kind
    cdef i64* keys = <i64*> malloc((L + 1) * sizeof(i64))
    cdef double* p = &psi[0]
    try:
        with nogil:
            while jsamp < S and sample_steps[jsamp] == 0:
                for q in range(2 * dim):
                    out[jsamp, q] = p[q]
                jsamp += 1
            for t in range(T):
                kind = _hop_kind(&occ[0], &sites[0], L, choices[t], dirs[t])
                if kind:
                    if kind == 2 and pending > 0:
                        _ising_flush(p, dim, &occ[0], L, n, eta * pending, keys)
                        pending = 0
                    _hop(&occ[0], &sites[0], L, choices[t], dirs[t])
                pending += 1
                if jsamp < S and sample_steps[jsamp] == t + 1:
                    _ising_flush(p, dim, &occ[0], L, n, eta * pending, keys)
                    pending = 0
                    for q in range(2 * dim):
                        out[jsamp, q] = p[q]
                    jsamp += 1
            if pending > 0:
                _ising_flush(p, dim, &occ[0], L, n, eta * pending, keys)
    finally:
        free(keys)


# ---------------------------------------------------------------- billiard

cdef inline double _pair_time(const double* pos, const double* vel, Py_ssize_t a, Py_ssize_t b,
                              double d2) noexcept nogil:
    cdef double rx = pos[3 * a] - pos[3 * b]
    cdef double ry = pos[3 * a + 1] - pos[3 * b + 1]
    cdef double rz = pos[3 * a + 2] - pos[3 * b + 2]
    cdef double vx = vel[3 * a] - vel[3 * b]
    cdef double vy = vel[3 * a + 1] - vel[3 * b + 1]
    cdef double vz = vel[3 * a + 2] - vel[3 * b + 2]
    cdef double bij = rx * vx + ry * vy + rz * vz
    cdef double vv, rr, disc, t
    if bij >= 0.0:
        return INFINITY
    vv = vx * vx + vy * vy + vz * vz
    rr = rx * rx + ry * ry + rz * rz
    disc = bij * bij - vv * (rr - d2)
    if disc <= 0.0:
        return INFINITY
    t = (-bij - sqrt(disc)) / vv
    if t < 0.0:
        t = 0.0
    return t


cdef inline double _wall_time(double x, double v, double lo, double hi) noexcept nogil:
    cdef double t
    if v > 0.0:
        t = (hi - x) / v
    elif v < 0.0:
        t = (lo - x) / v
    else:
        return INFINITY
    if t < 0.0:
        t = 0.0
    return t


cdef void _recompute(const double* pos, const double* vel, Py_ssize_t n, Py_ssize_t b, double d2,
                     double lo, const double* hi, double* coltime, i64* partner) noexcept nogil:
    # partner >= 0: pair; partner = -1 - axis: wall. Pairs win ties, then lower index.
    cdef Py_ssize_t k, ax
    cdef double best = INFINITY, t
    cdef i64 who = -4
    for k in range(n):
        if k == b:
            continue
        t = _pair_time(pos, vel, b, k, d2)
        if t < best:
            best = t
            who = k
    for ax in range(3):
        t = _wall_time(pos[3 * b + ax], vel[3 * b + ax], lo, hi[ax])
        if t < best:
            best = t
            who = -1 - ax
    coltime[b] = best
    partner[b] = who


def billiard_run(double[:, ::1] pos, double[:, ::1] vel, double diameter, const double[::1] box,
                 i64 max_pairs, i64 max_events, i64[:, ::1] out_pairs):
    """Event-driven hard-sphere dynamics. Returns ``(n_pairs, n_events, elapsed, status)``.

    status: 0 ok, 1 stasis (no future event), 2 pair resolved off contact.
    """
    cdef Py_ssize_t n = pos.shape[0]
    cdef double* P = &pos[0, 0]
    cdef double* V = &vel[0, 0]
    cdef double d2 = diameter * diameter
    cdef double lo = 0.5 * diameter
    cdef double hi[3]
    cdef double* coltime = <double*> malloc(n * sizeof(double))
    cdef i64* partner = <i64*> malloc(n * sizeof(i64))
    cdef Py_ssize_t i, j, k, ax, q
    cdef i64 npairs = 0, nevents = 0, who
    cdef int status = 0
    cdef double tmin, elapsed = 0.0, rx, ry, rz, vx, vy, vz, bij, rr, f, dist
    cdef bint better
    for ax in range(3):
        hi[ax] = box[ax] - lo
    try:
        with nogil:
            for i in range(n):
                _recompute(P, V, n, i, d2, lo, hi, coltime, partner)
            while npairs < max_pairs and nevents < max_events:
                i = 0
                for k in range(1, n):
                    if coltime[k] < coltime[i]:
                        i = k
                    elif coltime[k] == coltime[i] and partner[k] >= 0 and partner[i] < 0:
                        i = k
                tmin = coltime[i]
                if tmin == INFINITY:
                    status = 1
                    break
                for q in range(3 * n):
                    P[q] = P[q] + V[q] * tmin
                for k in range(n):
                    coltime[k] = coltime[k] - tmin
                elapsed = elapsed + tmin
                who = partner[i]
                nevents += 1
                if who < 0:
                    ax = -1 - who
                    V[3 * i + ax] = -V[3 * i + ax]
                    P[3 * i + ax] = lo if V[3 * i + ax] > 0.0 else hi[ax]
                    _recompute(P, V, n, i, d2, lo, hi, coltime, partner)
                    for k in range(n):
                        if partner[k] == i:
                            _recompute(P, V, n, k, d2, lo, hi, coltime, partner)
                    continue
                j = who
                rx = P[3 * i] - P[3 * j]
                ry = P[3 * i + 1] - P[3 * j + 1]
                rz = P[3 * i + 2] - P[3 * j + 2]
                rr = rx * rx + ry * ry + rz * rz
                dist = sqrt(rr)
                if dist - diameter > 1e-6 or diameter - dist > 1e-6:
                    status = 2
                    break
                vx = V[3 * i] - V[3 * j]
                vy = V[3 * i + 1] - V[3 * j + 1]
                vz = V[3 * i + 2] - V[3 * j + 2]
                bij = rx * vx + ry * vy + rz * vz
                f = bij / rr
                V[3 * i] = V[3 * i] - f * rx
                V[3 * i + 1] = V[3 * i + 1] - f * ry
                V[3 * i + 2] = V[3 * i + 2] - f * rz
                V[3 * j] = V[3 * j] + f * rx
                V[3 * j + 1] = V[3 * j + 1] + f * ry
                V[3 * j + 2] = V[3 * j + 2] + f * rz
                out_pairs[npairs, 0] = i if i < j else j
                out_pairs[npairs, 1] = j if i < j else i
                npairs += 1
                _recompute(P, V, n, i, d2, lo, hi, coltime, partner)
                _recompute(P, V, n, j, d2, lo, hi, coltime, partner)
                for k in range(n):
                    if k != i and k != j and (partner[k] == i or partner[k] == j):
                        _recompute(P, V, n, k, d2, lo, hi, coltime, partner)
    finally:
        free(coltime)
        free(partner)
    return npairs, nevents, elapsed, status
