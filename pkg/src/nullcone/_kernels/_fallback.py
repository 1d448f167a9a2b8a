"""Pure-NumPy twins of the compiled stencil kernels.

Semantics here are the reference: the Cython module implements the same
update rules node-for-node.  Reductions use a fixed-chunk pairwise tree so
results do not depend on how work is split across workers.
"""

import numpy as np

CHUNK = 1024

_num_threads = 1


def set_num_threads(n):
    global _num_threads
    _num_threads = max(1, int(n))


def get_num_threads():
    return _num_threads


def det_sum(x):
    """Deterministic sum: fixed 1024-wide chunks, adjacent-pair tree combine."""
    x = np.ascontiguousarray(np.ravel(x), dtype=np.float64)
    n = x.size
    if n == 0:
        return 0.0
    pad = (-n) % CHUNK
    if pad:
        x = np.concatenate([x, np.zeros(pad)])
    partials = x.reshape(-1, CHUNK).sum(axis=1)
    while partials.size > 1:
        m = partials.size
        half = m // 2
        folded = partials[: 2 * half : 2] + partials[1 : 2 * half : 2]
        if m % 2:
            folded = np.concatenate([folded, partials[-1:]])
        partials = folded
    return float(partials[0])


def _central(u, axis, inv2h):
    lo = [slice(1, -1)] * u.ndim
    hi = [slice(1, -1)] * u.ndim
    lo[axis] = slice(0, -2)
    hi[axis] = slice(2, None)
    return (u[tuple(hi)] - u[tuple(lo)]) * inv2h


def _second(u, axis, invh2):
    c = [slice(1, -1)] * u.ndim
    lo = list(c)
    hi = list(c)
    lo[axis] = slice(0, -2)
    hi[axis] = slice(2, None)
    return (u[tuple(hi)] - 2.0 * u[tuple(c)] + u[tuple(lo)]) * invh2


def _cross(u, ax_a, ax_b, inv4h2):
    def sl(da, db):
        s = [slice(1, -1)] * u.ndim
        s[ax_a] = slice(1 + da, u.shape[ax_a] - 1 + da)
        s[ax_b] = slice(1 + db, u.shape[ax_b] - 1 + db)
        return u[tuple(s)]

    return (sl(1, 1) - sl(1, -1) - sl(-1, 1) + sl(-1, -1)) * inv4h2


def _laplacian(u, invh2):
    ndim = u.ndim
    out = _second(u, 0, invh2)
    for ax in range(1, ndim):
        out += _second(u, ax, invh2)
    return out


def _step(un, uc, up, up2, c2, dt, h, b_idx, b_val, q_idx, q_val,
          b3_idx, b3_val, q3_idx, q3_val, mask):
    D = uc.shape[0]
    ndim = uc.ndim - 1
    inv2h = 1.0 / (2.0 * h)
    invh2 = 1.0 / (h * h)
    inv4h2 = 1.0 / (4.0 * h * h)
    dt2 = dt * dt
    core = (slice(1, -1),) * ndim

    # gradients at level m: lagged time slot, central space
    g = np.empty((D, ndim + 1) + tuple(s - 2 for s in uc.shape[1:]))
    for comp in range(D):
        g[comp, 0] = (uc[comp][core] - up[comp][core]) / dt
        for ax in range(ndim):
            g[comp, ax + 1] = _central(uc[comp], ax, inv2h)

    hess = {}

    def hessian(comp, a, b):
        key = (comp, min(a, b), max(a, b))
        if key in hess:
            return hess[key]
        a2, b2 = key[1], key[2]
        if a2 == 0 and b2 == 0:
            if up2 is None:
                raise ValueError("quasilinear terms need the m-2 level")
            val = (uc[comp][core] - 2.0 * up[comp][core] + up2[comp][core]) / dt2
        elif a2 == 0:
            val = _central(uc[comp] - up[comp], b2 - 1, inv2h) / dt
        elif a2 == b2:
            val = _second(uc[comp], a2 - 1, invh2)
        else:
            val = _cross(uc[comp], a2 - 1, b2 - 1, inv4h2)
        hess[key] = val
        return val

    F = None
    if len(b_val) or len(q_val) or len(b3_val) or len(q3_val):
        F = np.zeros((D,) + g.shape[2:])
        for row, val in zip(b_idx, b_val):
            ci, cj, ck, dj, dk = row
            F[ci] += val * g[cj, dj] * g[ck, dk]
        for row, val in zip(q_idx, q_val):
            ci, cj, ck, dj, dk, dl = row
            F[ci] += val * g[cj, dj] * hessian(ck, dk, dl)
        for row, val in zip(b3_idx, b3_val):
            ci, cj, ck, cl, dj, dk, dl = row
            F[ci] += val * g[cj, dj] * g[ck, dk] * g[cl, dl]
        for row, val in zip(q3_idx, q3_val):
            ci, cj, ck, cl, dj, dk, dl, dm = row
            F[ci] += val * g[cj, dj] * g[ck, dk] * hessian(cl, dl, dm)

    for comp in range(D):
        rhs = c2[comp] * _laplacian(uc[comp], invh2)
        if F is not None:
            rhs = rhs + F[comp]
        un[comp][core] = (2.0 * uc[comp][core] - up[comp][core] + dt2 * rhs)

    if mask is not None:
        solid = mask[core].astype(bool)
        for comp in range(D):
            un[comp][core][solid] = 0.0
        gsq = (g * g).sum(axis=(0, 1))
        gsq[solid] = 0.0
        sup_sq = float(gsq.max()) if gsq.size else 0.0
    else:
        sup_sq = float((g * g).sum(axis=(0, 1)).max()) if g.size else 0.0
    return sup_sq


def step_1d(un, uc, up, up2, c2, dt, h, b_idx, b_val, q_idx, q_val, mask=None):
    return _step(un, uc, up, up2, c2, dt, h, b_idx, b_val, q_idx, q_val,
                 (), (), (), (), mask)


def step_2d(un, uc, up, up2, c2, dt, h, b_idx, b_val, q_idx, q_val,
            b3_idx=(), b3_val=(), q3_idx=(), q3_val=(), mask=None):
    return _step(un, uc, up, up2, c2, dt, h, b_idx, b_val, q_idx, q_val,
                 b3_idx, b3_val, q3_idx, q3_val, mask)


def step_3d(un, uc, up, up2, c2, dt, h, b_idx, b_val, q_idx, q_val, mask=None):
    return _step(un, uc, up, up2, c2, dt, h, b_idx, b_val, q_idx, q_val,
                 (), (), (), (), mask)


def energy_pair(uc, up, c2, dt, h, mask=None):
    """Diagnostics for the frame (u at t-dt, u at t).

    Returns (conserved-form energy, midpoint-sampled plain energy integral,
    sup over interior nodes of |u'|^2).  The conserved form pairs forward
    differences of the two levels; it is exactly constant for the linear
    leapfrog update with homogeneous Dirichlet boundaries.
    """
    D = uc.shape[0]
    ndim = uc.ndim - 1
    inv2h = 1.0 / (2.0 * h)
    hn = h ** ndim
    core = (slice(1, -1),) * ndim

    valid = None
    if mask is not None:
        valid = ~mask[core].astype(bool)

    e_pair = 0.0
    e_mid_acc = None
    sup_acc = None
    for comp in range(D):
        gt = (uc[comp][core] - up[comp][core]) / dt
        gt2 = gt * gt
        if valid is not None:
            gt2 = np.where(valid, gt2, 0.0)
        e_pair += det_sum(gt2)
        pair_grad = 0.0
        mid_grad = None
        for ax in range(ndim):
            hi = [slice(None)] * ndim
            lo = [slice(None)] * ndim
            hi[ax] = slice(1, None)
            lo[ax] = slice(0, -1)
            dc = (uc[comp][tuple(hi)] - uc[comp][tuple(lo)]) / h
            dp = (up[comp][tuple(hi)] - up[comp][tuple(lo)]) / h
            prod = dc * dp
            if mask is not None:
                face_solid = mask[tuple(hi)].astype(bool) | mask[tuple(lo)].astype(bool)
                prod = np.where(face_solid, 0.0, prod)
            pair_grad += det_sum(prod)
            gc = _central(uc[comp], ax, inv2h)
            gp = _central(up[comp], ax, inv2h)
            gm = 0.5 * (gc + gp)
            mid_grad = gm * gm if mid_grad is None else mid_grad + gm * gm
        e_pair += c2[comp] * pair_grad
        dens = gt2 + c2[comp] * mid_grad
        if valid is not None:
            dens = np.where(valid, dens, 0.0)
        e_mid_acc = dens if e_mid_acc is None else e_mid_acc + dens
        s = gt2 + mid_grad
        if valid is not None:
            s = np.where(valid, s, 0.0)
        sup_acc = s if sup_acc is None else sup_acc + s
    e_mid = det_sum(e_mid_acc) * hn
    sup_sq = float(sup_acc.max()) if sup_acc.size else 0.0
    return e_pair * hn, e_mid, sup_sq
