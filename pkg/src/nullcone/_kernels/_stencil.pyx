# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled stencil kernels: fused leapfrog updates and frame diagnostics.

Node-for-node these match the NumPy twins in ``_fallback``.  Grid loops are
parallel over outer-axis slabs; every reduction goes through per-slab (or
per-chunk) partials combined by a serial adjacent-pair tree, so results are
byte-identical at any thread count.
"""

import numpy as np

cimport numpy as cnp
from cython.parallel import prange

ctypedef cnp.int32_t itype

cdef Py_ssize_t CHUNK = 1024

cdef int _nthreads = 1


def set_num_threads(n):
    global _nthreads
    _nthreads = max(1, int(n))


def get_num_threads():
    return _nthreads


# ---------------------------------------------------------------------------
# deterministic sum
# ---------------------------------------------------------------------------

cdef inline double _chunk_sum(double[::1] x, Py_ssize_t s, Py_ssize_t e) nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t t
    for t in range(s, e):
        acc += x[t]
    return acc


cdef double _fold(double[::1] p, Py_ssize_t m) nogil:
    cdef Py_ssize_t half, idx
    if m == 0:
        return 0.0
    while m > 1:
        half = m // 2
        for idx in range(half):
            p[idx] = p[2 * idx] + p[2 * idx + 1]
        if m % 2:
            p[half] = p[m - 1]
            m = half + 1
        else:
            m = half
    return p[0]


def det_sum(xobj):
    """Deterministic sum: fixed 1024-wide chunks, adjacent-pair tree combine."""
    x = np.ascontiguousarray(np.ravel(xobj), dtype=np.float64)
    cdef double[::1] xv = x
    cdef Py_ssize_t n = xv.shape[0]
    if n == 0:
        return 0.0
    cdef Py_ssize_t nchunks = (n + CHUNK - 1) // CHUNK
    partials = np.empty(nchunks, dtype=np.float64)
    cdef double[::1] pv = partials
    cdef Py_ssize_t ci, e
    cdef int nt = _nthreads
    for ci in prange(nchunks, nogil=True, num_threads=nt, schedule='static'):
        e = ci * CHUNK + CHUNK
        if e > n:
            e = n
        pv[ci] = _chunk_sum(xv, ci * CHUNK, e)
    cdef double out
    with nogil:
        out = _fold(pv, nchunks)
    return out


cdef double _fold_max(double[::1] p, Py_ssize_t m) nogil:
    cdef double best = p[0]
    cdef Py_ssize_t idx
    for idx in range(1, m):
        if p[idx] > best:
            best = p[idx]
    return best


# ---------------------------------------------------------------------------
# per-node hessian entries (lagged time slots, central space)
# ---------------------------------------------------------------------------

cdef inline double _hess1(double[:, ::1] uc, double[:, ::1] up, double[:, ::1] up2,
                          int ck, int a, int b, Py_ssize_t i,
                          double invdt, double invdt2, double inv2h,
                          double invh2) nogil:
    cdef int t
    if a > b:
        t = a; a = b; b = t
    if a == 0 and b == 0:
        return (uc[ck, i] - 2.0 * up[ck, i] + up2[ck, i]) * invdt2
    if a == 0:
        return ((uc[ck, i + 1] - up[ck, i + 1]) - (uc[ck, i - 1] - up[ck, i - 1])) * inv2h * invdt
    return (uc[ck, i + 1] - 2.0 * uc[ck, i] + uc[ck, i - 1]) * invh2


cdef inline double _hess2(double[:, :, ::1] uc, double[:, :, ::1] up, double[:, :, ::1] up2,
                          int ck, int a, int b, Py_ssize_t i, Py_ssize_t j,
                          double invdt, double invdt2, double inv2h,
                          double invh2, double inv4h2) nogil:
    cdef int t
    if a > b:
        t = a; a = b; b = t
    if a == 0 and b == 0:
        return (uc[ck, i, j] - 2.0 * up[ck, i, j] + up2[ck, i, j]) * invdt2
    if a == 0:
        if b == 1:
            return ((uc[ck, i + 1, j] - up[ck, i + 1, j]) - (uc[ck, i - 1, j] - up[ck, i - 1, j])) * inv2h * invdt
        return ((uc[ck, i, j + 1] - up[ck, i, j + 1]) - (uc[ck, i, j - 1] - up[ck, i, j - 1])) * inv2h * invdt
    if a == b:
        if a == 1:
            return (uc[ck, i + 1, j] - 2.0 * uc[ck, i, j] + uc[ck, i - 1, j]) * invh2
        return (uc[ck, i, j + 1] - 2.0 * uc[ck, i, j] + uc[ck, i, j - 1]) * invh2
    return (uc[ck, i + 1, j + 1] - uc[ck, i + 1, j - 1]
            - uc[ck, i - 1, j + 1] + uc[ck, i - 1, j - 1]) * inv4h2


cdef inline double _hess3(double[:, :, :, ::1] uc, double[:, :, :, ::1] up,
                          double[:, :, :, ::1] up2,
                          int ck, int a, int b,
                          Py_ssize_t i, Py_ssize_t j, Py_ssize_t k,
                          double invdt, double invdt2, double inv2h,
                          double invh2, double inv4h2) nogil:
    cdef int t
    if a > b:
        t = a; a = b; b = t
    if a == 0 and b == 0:
        return (uc[ck, i, j, k] - 2.0 * up[ck, i, j, k] + up2[ck, i, j, k]) * invdt2
    if a == 0:
        if b == 1:
            return ((uc[ck, i + 1, j, k] - up[ck, i + 1, j, k])
                    - (uc[ck, i - 1, j, k] - up[ck, i - 1, j, k])) * inv2h * invdt
        if b == 2:
            return ((uc[ck, i, j + 1, k] - up[ck, i, j + 1, k])
                    - (uc[ck, i, j - 1, k] - up[ck, i, j - 1, k])) * inv2h * invdt
        return ((uc[ck, i, j, k + 1] - up[ck, i, j, k + 1])
                - (uc[ck, i, j, k - 1] - up[ck, i, j, k - 1])) * inv2h * invdt
    if a == b:
        if a == 1:
            return (uc[ck, i + 1, j, k] - 2.0 * uc[ck, i, j, k] + uc[ck, i - 1, j, k]) * invh2
        if a == 2:
            return (uc[ck, i, j + 1, k] - 2.0 * uc[ck, i, j, k] + uc[ck, i, j - 1, k]) * invh2
        return (uc[ck, i, j, k + 1] - 2.0 * uc[ck, i, j, k] + uc[ck, i, j, k - 1]) * invh2
    if a == 1 and b == 2:
        return (uc[ck, i + 1, j + 1, k] - uc[ck, i + 1, j - 1, k]
                - uc[ck, i - 1, j + 1, k] + uc[ck, i - 1, j - 1, k]) * inv4h2
    if a == 1 and b == 3:
        return (uc[ck, i + 1, j, k + 1] - uc[ck, i + 1, j, k - 1]
                - uc[ck, i - 1, j, k + 1] + uc[ck, i - 1, j, k - 1]) * inv4h2
    return (uc[ck, i, j + 1, k + 1] - uc[ck, i, j + 1, k - 1]
            - uc[ck, i, j - 1, k + 1] + uc[ck, i, j - 1, k - 1]) * inv4h2


# ---------------------------------------------------------------------------
# leapfrog node updates
# ---------------------------------------------------------------------------

cdef inline double _node_step_1d(double[:, ::1] un, double[:, ::1] uc,
                                 double[:, ::1] up, double[:, ::1] up2,
                                 double[::1] c2, int D,
                                 itype[:, ::1] b_idx, double[::1] b_val, Py_ssize_t nb,
                                 itype[:, ::1] q_idx, double[::1] q_val, Py_ssize_t nq,
                                 Py_ssize_t i, double invdt, double invdt2, double dt2,
                                 double inv2h, double invh2) nogil:
    cdef double g[4][2]
    cdef double F[4]
    cdef double gsq = 0.0, lap
    cdef Py_ssize_t e
    cdef int ci, sj
    for ci in range(D):
        g[ci][0] = (uc[ci, i] - up[ci, i]) * invdt
        g[ci][1] = (uc[ci, i + 1] - uc[ci, i - 1]) * inv2h
        F[ci] = 0.0
        for sj in range(2):
            gsq += g[ci][sj] * g[ci][sj]
    for e in range(nb):
        F[b_idx[e, 0]] += b_val[e] * g[b_idx[e, 1]][b_idx[e, 3]] * g[b_idx[e, 2]][b_idx[e, 4]]
    for e in range(nq):
        F[q_idx[e, 0]] += q_val[e] * g[q_idx[e, 1]][q_idx[e, 3]] * _hess1(
            uc, up, up2, q_idx[e, 2], q_idx[e, 4], q_idx[e, 5], i,
            invdt, invdt2, inv2h, invh2)
    for ci in range(D):
        lap = (uc[ci, i + 1] - 2.0 * uc[ci, i] + uc[ci, i - 1]) * invh2
        un[ci, i] = 2.0 * uc[ci, i] - up[ci, i] + dt2 * (c2[ci] * lap + F[ci])
    return gsq


cdef inline double _node_step_2d(double[:, :, ::1] un, double[:, :, ::1] uc,
                                 double[:, :, ::1] up, double[:, :, ::1] up2,
                                 double[::1] c2, int D,
                                 itype[:, ::1] b_idx, double[::1] b_val, Py_ssize_t nb,
                                 itype[:, ::1] q_idx, double[::1] q_val, Py_ssize_t nq,
                                 itype[:, ::1] b3_idx, double[::1] b3_val, Py_ssize_t nb3,
                                 itype[:, ::1] q3_idx, double[::1] q3_val, Py_ssize_t nq3,
                                 Py_ssize_t i, Py_ssize_t j,
                                 double invdt, double invdt2, double dt2,
                                 double inv2h, double invh2, double inv4h2) nogil:
    cdef double g[4][3]
    cdef double F[4]
    cdef double gsq = 0.0, lap
    cdef Py_ssize_t e
    cdef int ci, sj
    for ci in range(D):
        g[ci][0] = (uc[ci, i, j] - up[ci, i, j]) * invdt
        g[ci][1] = (uc[ci, i + 1, j] - uc[ci, i - 1, j]) * inv2h
        g[ci][2] = (uc[ci, i, j + 1] - uc[ci, i, j - 1]) * inv2h
        F[ci] = 0.0
        for sj in range(3):
            gsq += g[ci][sj] * g[ci][sj]
    for e in range(nb):
        F[b_idx[e, 0]] += b_val[e] * g[b_idx[e, 1]][b_idx[e, 3]] * g[b_idx[e, 2]][b_idx[e, 4]]
    for e in range(nq):
        F[q_idx[e, 0]] += q_val[e] * g[q_idx[e, 1]][q_idx[e, 3]] * _hess2(
            uc, up, up2, q_idx[e, 2], q_idx[e, 4], q_idx[e, 5], i, j,
            invdt, invdt2, inv2h, invh2, inv4h2)
    for e in range(nb3):
        F[b3_idx[e, 0]] += (b3_val[e] * g[b3_idx[e, 1]][b3_idx[e, 4]]
                            * g[b3_idx[e, 2]][b3_idx[e, 5]]
                            * g[b3_idx[e, 3]][b3_idx[e, 6]])
    for e in range(nq3):
        F[q3_idx[e, 0]] += (q3_val[e] * g[q3_idx[e, 1]][q3_idx[e, 4]]
                            * g[q3_idx[e, 2]][q3_idx[e, 5]]
                            * _hess2(uc, up, up2, q3_idx[e, 3],
                                     q3_idx[e, 6], q3_idx[e, 7], i, j,
                                     invdt, invdt2, inv2h, invh2, inv4h2))
    for ci in range(D):
        lap = (uc[ci, i + 1, j] + uc[ci, i - 1, j] + uc[ci, i, j + 1]
               + uc[ci, i, j - 1] - 4.0 * uc[ci, i, j]) * invh2
        un[ci, i, j] = 2.0 * uc[ci, i, j] - up[ci, i, j] + dt2 * (c2[ci] * lap + F[ci])
    return gsq


cdef inline double _node_step_3d(double[:, :, :, ::1] un, double[:, :, :, ::1] uc,
                                 double[:, :, :, ::1] up, double[:, :, :, ::1] up2,
                                 double[::1] c2, int D,
                                 itype[:, ::1] b_idx, double[::1] b_val, Py_ssize_t nb,
                                 itype[:, ::1] q_idx, double[::1] q_val, Py_ssize_t nq,
                                 Py_ssize_t i, Py_ssize_t j, Py_ssize_t k,
                                 double invdt, double invdt2, double dt2,
                                 double inv2h, double invh2, double inv4h2) nogil:
    cdef double g[4][4]
    cdef double F[4]
    cdef double gsq = 0.0, lap
    cdef Py_ssize_t e
    cdef int ci, sj
    for ci in range(D):
        g[ci][0] = (uc[ci, i, j, k] - up[ci, i, j, k]) * invdt
        g[ci][1] = (uc[ci, i + 1, j, k] - uc[ci, i - 1, j, k]) * inv2h
        g[ci][2] = (uc[ci, i, j + 1, k] - uc[ci, i, j - 1, k]) * inv2h
        g[ci][3] = (uc[ci, i, j, k + 1] - uc[ci, i, j, k - 1]) * inv2h
        F[ci] = 0.0
        for sj in range(4):
            gsq += g[ci][sj] * g[ci][sj]
    for e in range(nb):
        F[b_idx[e, 0]] += b_val[e] * g[b_idx[e, 1]][b_idx[e, 3]] * g[b_idx[e, 2]][b_idx[e, 4]]
    for e in range(nq):
        F[q_idx[e, 0]] += q_val[e] * g[q_idx[e, 1]][q_idx[e, 3]] * _hess3(
            uc, up, up2, q_idx[e, 2], q_idx[e, 4], q_idx[e, 5], i, j, k,
            invdt, invdt2, inv2h, invh2, inv4h2)
    for ci in range(D):
        lap = (uc[ci, i + 1, j, k] + uc[ci, i - 1, j, k]
               + uc[ci, i, j + 1, k] + uc[ci, i, j - 1, k]
               + uc[ci, i, j, k + 1] + uc[ci, i, j, k - 1]
               - 6.0 * uc[ci, i, j, k]) * invh2
        un[ci, i, j, k] = 2.0 * uc[ci, i, j, k] - up[ci, i, j, k] + dt2 * (c2[ci] * lap + F[ci])
    return gsq


def step_1d(un, uc, up, up2, c2, double dt, double h,
            b_idx, b_val, q_idx, q_val, mask=None):
    cdef double[:, ::1] unv = un, ucv = uc, upv = up
    cdef double[:, ::1] up2v = up2 if up2 is not None else up
    cdef double[::1] c2v = c2
    cdef itype[:, ::1] biv = b_idx
    cdef double[::1] bvv = b_val
    cdef itype[:, ::1] qiv = q_idx
    cdef double[::1] qvv = q_val
    cdef cnp.uint8_t[::1] maskv = mask if mask is not None else None
    cdef bint use_mask = mask is not None
    cdef int D = ucv.shape[0]
    cdef Py_ssize_t nx = ucv.shape[1], nb = bvv.shape[0], nq = qvv.shape[0]
    cdef double invdt = 1.0 / dt, invdt2 = 1.0 / (dt * dt), dt2 = dt * dt
    cdef double inv2h = 0.5 / h, invh2 = 1.0 / (h * h)
    cdef Py_ssize_t i
    cdef int ci
    cdef double sup = 0.0, gsq
    with nogil:
        for i in range(1, nx - 1):
            if use_mask and maskv[i]:
                for ci in range(D):
                    unv[ci, i] = 0.0
                continue
            gsq = _node_step_1d(unv, ucv, upv, up2v, c2v, D,
                                biv, bvv, nb, qiv, qvv, nq,
                                i, invdt, invdt2, dt2, inv2h, invh2)
            if gsq > sup:
                sup = gsq
    return sup


def step_2d(un, uc, up, up2, c2, double dt, double h,
            b_idx, b_val, q_idx, q_val,
            b3_idx, b3_val, q3_idx, q3_val, mask=None):
    cdef double[:, :, ::1] unv = un, ucv = uc, upv = up
    cdef double[:, :, ::1] up2v = up2 if up2 is not None else up
    cdef double[::1] c2v = c2
    cdef itype[:, ::1] biv = b_idx
    cdef double[::1] bvv = b_val
    cdef itype[:, ::1] qiv = q_idx
    cdef double[::1] qvv = q_val
    cdef itype[:, ::1] b3iv = b3_idx
    cdef double[::1] b3vv = b3_val
    cdef itype[:, ::1] q3iv = q3_idx
    cdef double[::1] q3vv = q3_val
    cdef cnp.uint8_t[:, ::1] maskv = mask if mask is not None else None
    cdef bint use_mask = mask is not None
    cdef int D = ucv.shape[0]
    cdef Py_ssize_t nx = ucv.shape[1], ny = ucv.shape[2]
    cdef Py_ssize_t nb = bvv.shape[0], nq = qvv.shape[0]
    cdef Py_ssize_t nb3 = b3vv.shape[0], nq3 = q3vv.shape[0]
    cdef double invdt = 1.0 / dt, invdt2 = 1.0 / (dt * dt), dt2 = dt * dt
    cdef double inv2h = 0.5 / h, invh2 = 1.0 / (h * h), inv4h2 = 0.25 / (h * h)
    cdef Py_ssize_t i, j
    cdef int ci
    cdef double gsq
    cdef int nt = _nthreads
    sup_slab = np.zeros(nx, dtype=np.float64)
    cdef double[::1] supv = sup_slab
    for i in prange(1, nx - 1, nogil=True, num_threads=nt, schedule='static'):
        for j in range(1, ny - 1):
            if use_mask and maskv[i, j]:
                for ci in range(D):
                    unv[ci, i, j] = 0.0
                continue
            gsq = _node_step_2d(unv, ucv, upv, up2v, c2v, D,
                                biv, bvv, nb, qiv, qvv, nq,
                                b3iv, b3vv, nb3, q3iv, q3vv, nq3,
                                i, j, invdt, invdt2, dt2, inv2h, invh2, inv4h2)
            if gsq > supv[i]:
                supv[i] = gsq
    cdef double sup
    with nogil:
        sup = _fold_max(supv, nx)
    return sup


def step_3d(un, uc, up, up2, c2, double dt, double h,
            b_idx, b_val, q_idx, q_val, mask=None):
    cdef double[:, :, :, ::1] unv = un, ucv = uc, upv = up
    cdef double[:, :, :, ::1] up2v = up2 if up2 is not None else up
    cdef double[::1] c2v = c2
    cdef itype[:, ::1] biv = b_idx
    cdef double[::1] bvv = b_val
    cdef itype[:, ::1] qiv = q_idx
    cdef double[::1] qvv = q_val
    cdef cnp.uint8_t[:, :, ::1] maskv = mask if mask is not None else None
    cdef bint use_mask = mask is not None
    cdef int D = ucv.shape[0]
    cdef Py_ssize_t nx = ucv.shape[1], ny = ucv.shape[2], nz = ucv.shape[3]
    cdef Py_ssize_t nb = bvv.shape[0], nq = qvv.shape[0]
    cdef double invdt = 1.0 / dt, invdt2 = 1.0 / (dt * dt), dt2 = dt * dt
    cdef double inv2h = 0.5 / h, invh2 = 1.0 / (h * h), inv4h2 = 0.25 / (h * h)
    cdef Py_ssize_t i, j, k
    cdef int ci
    cdef double gsq
    cdef int nt = _nthreads
    sup_slab = np.zeros(nx, dtype=np.float64)
    cdef double[::1] supv = sup_slab
    for i in prange(1, nx - 1, nogil=True, num_threads=nt, schedule='static'):
        for j in range(1, ny - 1):
            for k in range(1, nz - 1):
                if use_mask and maskv[i, j, k]:
                    for ci in range(D):
                        unv[ci, i, j, k] = 0.0
                    continue
                gsq = _node_step_3d(unv, ucv, upv, up2v, c2v, D,
                                    biv, bvv, nb, qiv, qvv, nq,
                                    i, j, k, invdt, invdt2, dt2,
                                    inv2h, invh2, inv4h2)
                if gsq > supv[i]:
                    supv[i] = gsq
    cdef double sup
    with nogil:
        sup = _fold_max(supv, nx)
    return sup


# ---------------------------------------------------------------------------
# frame diagnostics: conserved-form energy, midpoint energy, sup |u'|
# ---------------------------------------------------------------------------

def energy_pair_1d(uc, up, c2, double dt, double h, mask=None):
    cdef double[:, ::1] ucv = uc, upv = up
    cdef double[::1] c2v = c2
    cdef cnp.uint8_t[::1] maskv = mask if mask is not None else None
    cdef bint use_mask = mask is not None
    cdef int D = ucv.shape[0]
    cdef Py_ssize_t nx = ucv.shape[1]
    cdef double invdt = 1.0 / dt, invh = 1.0 / h, inv2h = 0.5 / h
    cdef double e_pair = 0.0, e_mid = 0.0, sup = 0.0
    cdef double gt, dc, dp, gm, dens, s
    cdef Py_ssize_t i
    cdef int ci
    with nogil:
        for i in range(nx):
            if use_mask and maskv[i]:
                continue
            dens = 0.0
            s = 0.0
            for ci in range(D):
                if 1 <= i < nx - 1:
                    gt = (ucv[ci, i] - upv[ci, i]) * invdt
                    gm = 0.5 * ((ucv[ci, i + 1] - ucv[ci, i - 1]) * inv2h
                                + (upv[ci, i + 1] - upv[ci, i - 1]) * inv2h)
                    dens += gt * gt + c2v[ci] * gm * gm
                    s += gt * gt + gm * gm
                    e_pair += gt * gt
                if i < nx - 1 and not (use_mask and maskv[i + 1]):
                    dc = (ucv[ci, i + 1] - ucv[ci, i]) * invh
                    dp = (upv[ci, i + 1] - upv[ci, i]) * invh
                    e_pair += c2v[ci] * dc * dp
            e_mid += dens
            if s > sup:
                sup = s
    return e_pair * h, e_mid * h, sup


def energy_pair_2d(uc, up, c2, double dt, double h, mask=None):
    cdef double[:, :, ::1] ucv = uc, upv = up
    cdef double[::1] c2v = c2
    cdef cnp.uint8_t[:, ::1] maskv = mask if mask is not None else None
    cdef bint use_mask = mask is not None
    cdef int D = ucv.shape[0]
    cdef Py_ssize_t nx = ucv.shape[1], ny = ucv.shape[2]
    cdef double invdt = 1.0 / dt, invh = 1.0 / h, inv2h = 0.5 / h
    cdef double hn = h * h
    cdef Py_ssize_t i, j
    cdef int ci
    cdef double gt, dc, dp, gmx, gmy, dens, s, acc_pair, acc_mid, acc_sup
    cdef bint solid
    cdef int nt = _nthreads
    pair_slab = np.zeros(nx, dtype=np.float64)
    mid_slab = np.zeros(nx, dtype=np.float64)
    sup_slab = np.zeros(nx, dtype=np.float64)
    cdef double[::1] pairv = pair_slab, midv = mid_slab, supv = sup_slab
    for i in prange(nx, nogil=True, num_threads=nt, schedule='static'):
        acc_pair = 0.0
        acc_mid = 0.0
        acc_sup = 0.0
        for j in range(ny):
            solid = use_mask and maskv[i, j]
            s = 0.0
            for ci in range(D):
                if not solid and 1 <= i < nx - 1 and 1 <= j < ny - 1:
                    gt = (ucv[ci, i, j] - upv[ci, i, j]) * invdt
                    gmx = 0.5 * ((ucv[ci, i + 1, j] - ucv[ci, i - 1, j]) * inv2h
                                 + (upv[ci, i + 1, j] - upv[ci, i - 1, j]) * inv2h)
                    gmy = 0.5 * ((ucv[ci, i, j + 1] - ucv[ci, i, j - 1]) * inv2h
                                 + (upv[ci, i, j + 1] - upv[ci, i, j - 1]) * inv2h)
                    dens = gt * gt + c2v[ci] * (gmx * gmx + gmy * gmy)
                    s = s + gt * gt + gmx * gmx + gmy * gmy
                    acc_pair = acc_pair + gt * gt
                    acc_mid = acc_mid + dens
                if i < nx - 1 and not (use_mask and (maskv[i, j] or maskv[i + 1, j])):
                    dc = (ucv[ci, i + 1, j] - ucv[ci, i, j]) * invh
                    dp = (upv[ci, i + 1, j] - upv[ci, i, j]) * invh
                    acc_pair = acc_pair + c2v[ci] * dc * dp
                if j < ny - 1 and not (use_mask and (maskv[i, j] or maskv[i, j + 1])):
                    dc = (ucv[ci, i, j + 1] - ucv[ci, i, j]) * invh
                    dp = (upv[ci, i, j + 1] - upv[ci, i, j]) * invh
                    acc_pair = acc_pair + c2v[ci] * dc * dp
            if s > acc_sup:
                acc_sup = s
        pairv[i] = acc_pair
        midv[i] = acc_mid
        supv[i] = acc_sup
    cdef double e_pair, e_mid, sup
    with nogil:
        e_pair = _fold(pairv, nx)
        e_mid = _fold(midv, nx)
        sup = _fold_max(supv, nx)
    return e_pair * hn, e_mid * hn, sup


def energy_pair_3d(uc, up, c2, double dt, double h, mask=None):
    cdef double[:, :, :, ::1] ucv = uc, upv = up
    cdef double[::1] c2v = c2
    cdef cnp.uint8_t[:, :, ::1] maskv = mask if mask is not None else None
    cdef bint use_mask = mask is not None
    cdef int D = ucv.shape[0]
    cdef Py_ssize_t nx = ucv.shape[1], ny = ucv.shape[2], nz = ucv.shape[3]
    cdef double invdt = 1.0 / dt, invh = 1.0 / h, inv2h = 0.5 / h
    cdef double hn = h * h * h
    cdef Py_ssize_t i, j, k
    cdef int ci
    cdef double gt, dc, dp, gmx, gmy, gmz, dens, s, acc_pair, acc_mid, acc_sup
    cdef bint solid, core
    cdef int nt = _nthreads
    pair_slab = np.zeros(nx, dtype=np.float64)
    mid_slab = np.zeros(nx, dtype=np.float64)
    sup_slab = np.zeros(nx, dtype=np.float64)
    cdef double[::1] pairv = pair_slab, midv = mid_slab, supv = sup_slab
    for i in prange(nx, nogil=True, num_threads=nt, schedule='static'):
        acc_pair = 0.0
        acc_mid = 0.0
        acc_sup = 0.0
        for j in range(ny):
            for k in range(nz):
                solid = use_mask and maskv[i, j, k]
                core = (1 <= i < nx - 1 and 1 <= j < ny - 1 and 1 <= k < nz - 1)
                s = 0.0
                for ci in range(D):
                    if not solid and core:
                        gt = (ucv[ci, i, j, k] - upv[ci, i, j, k]) * invdt
                        gmx = 0.5 * ((ucv[ci, i + 1, j, k] - ucv[ci, i - 1, j, k]) * inv2h
                                     + (upv[ci, i + 1, j, k] - upv[ci, i - 1, j, k]) * inv2h)
                        gmy = 0.5 * ((ucv[ci, i, j + 1, k] - ucv[ci, i, j - 1, k]) * inv2h
                                     + (upv[ci, i, j + 1, k] - upv[ci, i, j - 1, k]) * inv2h)
                        gmz = 0.5 * ((ucv[ci, i, j, k + 1] - ucv[ci, i, j, k - 1]) * inv2h
                                     + (upv[ci, i, j, k + 1] - upv[ci, i, j, k - 1]) * inv2h)
                        dens = gt * gt + c2v[ci] * (gmx * gmx + gmy * gmy + gmz * gmz)
                        s = s + gt * gt + gmx * gmx + gmy * gmy + gmz * gmz
                        acc_pair = acc_pair + gt * gt
                        acc_mid = acc_mid + dens
                    if i < nx - 1 and not (use_mask and (maskv[i, j, k] or maskv[i + 1, j, k])):
                        dc = (ucv[ci, i + 1, j, k] - ucv[ci, i, j, k]) * invh
                        dp = (upv[ci, i + 1, j, k] - upv[ci, i, j, k]) * invh
                        acc_pair = acc_pair + c2v[ci] * dc * dp
                    if j < ny - 1 and not (use_mask and (maskv[i, j, k] or maskv[i, j + 1, k])):
                        dc = (ucv[ci, i, j + 1, k] - ucv[ci, i, j, k]) * invh
                        dp = (upv[ci, i, j + 1, k] - upv[ci, i, j, k]) * invh
                        acc_pair = acc_pair + c2v[ci] * dc * dp
                    if k < nz - 1 and not (use_mask and (maskv[i, j, k] or maskv[i, j, k + 1])):
                        dc = (ucv[ci, i, j, k + 1] - ucv[ci, i, j, k]) * invh
                        dp = (upv[ci, i, j, k + 1] - upv[ci, i, j, k]) * invh
                        acc_pair = acc_pair + c2v[ci] * dc * dp
                if s > acc_sup:
                    acc_sup = s
        pairv[i] = acc_pair
        midv[i] = acc_mid
        supv[i] = acc_sup
    cdef double e_pair, e_mid, sup
    with nogil:
        e_pair = _fold(pairv, nx)
        e_mid = _fold(midv, nx)
        sup = _fold_max(supv, nx)
    return e_pair * hn, e_mid * hn, sup
