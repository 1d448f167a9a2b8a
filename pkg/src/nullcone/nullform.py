"""Coefficient-tensor algebra for the nonlinearities.

A system of D wave equations with speeds c_I carries a quadratic form
``b[I,J,K,j,k]`` (products of first derivatives), a quasilinear form
``q[I,J,K,j,k,l]`` (first derivative times a Hessian entry) and, in two
space dimensions, cubic analogues ``b3``/``q3``.  Component indices are
0-based internally and 1-based on the JSON wire format; derivative slots
are 0-based with slot 0 = time everywhere.

This module validates the energy symmetry of the quasilinear tensors,
decides the null conditions by dense deterministic sampling of the
characteristic cone, builds the standard example family, and evaluates the
forms pointwise or on whole grids.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from ._kernels import PackedEntries

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))

MIN_CONE_SAMPLES = 64
DEFAULT_CONE_SAMPLES = 256
DEFAULT_NULL_TOL = 1e-10


@dataclass
class CoefficientSet:
    """Speeds plus the coefficient tensors of one system."""

    dim: int
    speeds: np.ndarray                 # (D,)
    b: np.ndarray                      # (D, D, D, s, s), s = dim + 1
    q: np.ndarray                      # (D, D, D, s, s, s)
    b3: np.ndarray | None = None       # (D, D, D, D, s, s, s), dim == 2 only
    q3: np.ndarray | None = None       # (D, D, D, D, s, s, s, s)
    _packed: PackedEntries | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.speeds = np.asarray(self.speeds, dtype=np.float64)
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.speeds.ndim != 1 or self.speeds.size < 1:
            raise ValueError("speeds must be a non-empty vector")
        if np.any(self.speeds <= 0):
            raise ValueError("all propagation speeds must be positive")
        D, s = self.ncomp, self.dim + 1
        self.b = np.asarray(self.b, dtype=np.float64)
        self.q = np.asarray(self.q, dtype=np.float64)
        if self.b.shape != (D, D, D, s, s):
            raise ValueError(f"b must have shape {(D, D, D, s, s)}, got {self.b.shape}")
        if self.q.shape != (D, D, D, s, s, s):
            raise ValueError(f"q must have shape {(D, D, D, s, s, s)}, got {self.q.shape}")
        if (self.b3 is not None or self.q3 is not None) and self.dim != 2:
            raise ValueError("cubic tensors are defined for dim == 2 only")
        if self.b3 is not None:
            self.b3 = np.asarray(self.b3, dtype=np.float64)
            if self.b3.shape != (D, D, D, D, s, s, s):
                raise ValueError("b3 has wrong shape")
        if self.q3 is not None:
            self.q3 = np.asarray(self.q3, dtype=np.float64)
            if self.q3.shape != (D, D, D, D, s, s, s, s):
                raise ValueError("q3 has wrong shape")
        for t in (self.b, self.q, self.b3, self.q3):
            if t is not None and not np.all(np.isfinite(t)):
                raise ValueError("coefficient tensors must be finite")

    @property
    def ncomp(self):
        return int(self.speeds.size)

    @property
    def is_linear(self):
        return (not self.b.any() and not self.q.any()
                and (self.b3 is None or not self.b3.any())
                and (self.q3 is None or not self.q3.any()))

    @property
    def has_quasilinear(self):
        return bool(self.q.any() or (self.q3 is not None and self.q3.any()))

    def coefficient_mass(self):
        mass = float(np.abs(self.b).sum() + np.abs(self.q).sum())
        if self.b3 is not None:
            mass += float(np.abs(self.b3).sum())
        if self.q3 is not None:
            mass += float(np.abs(self.q3).sum())
        return mass

    def packed(self):
        if self._packed is None:
            self._packed = pack_entries(self)
        return self._packed


def zero_coefficients(dim, speeds, cubic=False):
    speeds = np.asarray(speeds, dtype=np.float64)
    D, s = speeds.size, dim + 1
    b3 = np.zeros((D, D, D, D, s, s, s)) if cubic else None
    q3 = np.zeros((D, D, D, D, s, s, s, s)) if cubic else None
    return CoefficientSet(dim, speeds, np.zeros((D, D, D, s, s)),
                          np.zeros((D, D, D, s, s, s)), b3, q3)


def pack_entries(cs):
    """Sparse (index, value) arrays of all nonzero entries, for the kernels."""
    def pack(t, width):
        if t is None or not t.any():
            return (np.zeros((0, width), dtype=np.int32),
                    np.zeros(0, dtype=np.float64))
        idx = np.argwhere(t != 0.0)
        vals = t[tuple(idx.T)]
        return np.ascontiguousarray(idx, dtype=np.int32), np.ascontiguousarray(vals)

    bi, bv = pack(cs.b, 5)
    qi, qv = pack(cs.q, 6)
    b3i, b3v = pack(cs.b3, 7)
    q3i, q3v = pack(cs.q3, 8)
    return PackedEntries(bi, bv, qi, qv, b3i, b3v, q3i, q3v)


# ---------------------------------------------------------------------------
# symmetry
# ---------------------------------------------------------------------------

@dataclass
class SymmetryViolation:
    index_a: tuple
    index_b: tuple
    value_a: float
    value_b: float


def _symmetry_partner_quadratic(q):
    # (I,J,K,j,k,l) -> (K,J,I,j,l,k)
    return np.transpose(q, (2, 1, 0, 3, 5, 4))


def _symmetry_partner_cubic(q3):
    # (I,J,K,L,j,k,l,m) -> (L,J,K,I,j,k,m,l)
    return np.transpose(q3, (3, 1, 2, 0, 4, 5, 7, 6))


def validate_symmetry(q):
    """List the index pairs where the energy symmetry fails, exactly.

    ``q`` is either a quasilinear tensor (6 axes) or the cubic variant
    (8 axes).  Each violated pair is reported once, components 1-based and
    derivative slots 0-based.
    """
    q = np.asarray(q, dtype=np.float64)
    if q.ndim == 6:
        partner = _symmetry_partner_quadratic(q)
        swap = lambda t: (t[2], t[1], t[0], t[3], t[5], t[4])
        comp_axes = 3
    elif q.ndim == 8:
        partner = _symmetry_partner_cubic(q)
        swap = lambda t: (t[3], t[1], t[2], t[0], t[4], t[5], t[7], t[6])
        comp_axes = 4
    else:
        raise ValueError("expected a 6-axis quasilinear or 8-axis cubic tensor")
    out = []
    for raw in np.argwhere(q != partner):
        idx = tuple(int(v) for v in raw)
        pidx = swap(idx)
        if idx > pidx:
            continue
        a = tuple(v + 1 for v in idx[:comp_axes]) + idx[comp_axes:]
        p = tuple(v + 1 for v in pidx[:comp_axes]) + pidx[comp_axes:]
        out.append(SymmetryViolation(a, p, float(q[idx]), float(q[pidx])))
    return out


# ---------------------------------------------------------------------------
# null conditions
# ---------------------------------------------------------------------------

def sphere_directions(dim, n_samples):
    """Deterministic low-discrepancy directions on the unit sphere S^{dim-1}."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        theta = 2.0 * np.pi * (np.arange(n_samples) + 0.5) / n_samples
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    if dim == 3:
        i = np.arange(n_samples)
        z = 1.0 - (2.0 * i + 1.0) / n_samples
        phi = GOLDEN_ANGLE * i
        rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    raise ValueError(f"dim must be 1, 2 or 3, got {dim}")


def cone_covectors(c, dim, n_samples):
    """Covectors (xi_0, xi') with |xi'| = 1 on both sheets of the c-cone."""
    omega = sphere_directions(dim, n_samples)
    m = omega.shape[0]
    xi = np.empty((2 * m, dim + 1))
    xi[:m, 0] = c
    xi[:m, 1:] = omega
    xi[m:, 0] = -c
    xi[m:, 1:] = omega
    return xi


@dataclass
class TripleVerdict:
    triple: tuple            # component indices, 1-based
    verdict: str             # "holds" | "violated" | "exempt"
    residual: float
    witness: np.ndarray | None

    def to_dict(self):
        return {
            "triple": list(self.triple),
            "verdict": self.verdict,
            "residual": self.residual,
            "witness": None if self.witness is None else [float(v) for v in self.witness],
        }


@dataclass
class NullReport:
    verdicts: list
    tol: float
    n_samples: int

    @property
    def holds(self):
        return all(v.verdict != "violated" for v in self.verdicts)

    @property
    def worst_residual(self):
        checked = [v.residual for v in self.verdicts if v.verdict != "exempt"]
        return max(checked) if checked else 0.0

    @property
    def worst_witness(self):
        checked = [v for v in self.verdicts if v.verdict != "exempt"]
        if not checked:
            return None
        return max(checked, key=lambda v: v.residual).witness

    def to_dict(self):
        return {
            "holds": self.holds,
            "worst_residual": self.worst_residual,
            "tol": self.tol,
            "n_samples": self.n_samples,
            "verdicts": [v.to_dict() for v in self.verdicts],
        }


def _check_samples(n_samples):
    if n_samples < MIN_CONE_SAMPLES:
        raise ValueError(
            f"n_samples={n_samples} gives insufficient cone coverage "
            f"(minimum {MIN_CONE_SAMPLES})")


def check_null_quadratic(b, q, speeds, n_samples=DEFAULT_CONE_SAMPLES,
                         tol=DEFAULT_NULL_TOL):
    """Decide the null conditions for the quadratic/quasilinear tensors.

    Every component triple whose three speeds agree is tested on a dense
    deterministic sample of its characteristic cone; triples with unequal
    speeds are exempt.  Returns one verdict per triple with the worst
    residual and the witness covector that produced it.
    """
    _check_samples(n_samples)
    if tol <= 0:
        raise ValueError("tol must be positive")
    b = np.asarray(b, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    speeds = np.asarray(speeds, dtype=np.float64)
    D = speeds.size
    dim = b.shape[-1] - 1
    verdicts = []
    cones = {}
    for ci in range(D):
        for cj in range(D):
            for ck in range(D):
                triple = (ci + 1, cj + 1, ck + 1)
                if not (speeds[ci] == speeds[cj] == speeds[ck]):
                    verdicts.append(TripleVerdict(triple, "exempt", 0.0, None))
                    continue
                c = float(speeds[ci])
                if c not in cones:
                    cones[c] = cone_covectors(c, dim, n_samples)
                xi = cones[c]
                rb = np.einsum("jk,sj,sk->s", b[ci, cj, ck], xi, xi)
                rq = np.einsum("jkl,sj,sk,sl->s", q[ci, cj, ck], xi, xi, xi)
                res = np.maximum(np.abs(rb), np.abs(rq))
                worst = int(np.argmax(res))
                residual = float(res[worst])
                verdict = "holds" if residual <= tol else "violated"
                verdicts.append(TripleVerdict(triple, verdict, residual, xi[worst].copy()))
    return NullReport(verdicts, tol, n_samples)


def check_null_cubic(b3, q3, c, n_samples=DEFAULT_CONE_SAMPLES,
                     tol=DEFAULT_NULL_TOL):
    """Null-condition decision for the 2D cubic tensors at a single speed."""
    _check_samples(n_samples)
    if tol <= 0:
        raise ValueError("tol must be positive")
    b3 = np.asarray(b3, dtype=np.float64)
    q3 = np.asarray(q3, dtype=np.float64)
    dim = b3.shape[-1] - 1
    if dim != 2:
        raise ValueError("cubic tensors are defined for dim == 2")
    D = b3.shape[0]
    xi = cone_covectors(float(c), dim, n_samples)
    verdicts = []
    for ci in range(D):
        for cj in range(D):
            for ck in range(D):
                for cl in range(D):
                    quad = (ci + 1, cj + 1, ck + 1, cl + 1)
                    rb = np.einsum("jkl,sj,sk,sl->s", b3[ci, cj, ck, cl], xi, xi, xi)
                    rq = np.einsum("jklm,sj,sk,sl,sm->s", q3[ci, cj, ck, cl],
                                   xi, xi, xi, xi)
                    res = np.maximum(np.abs(rb), np.abs(rq))
                    worst = int(np.argmax(res))
                    residual = float(res[worst])
                    verdict = "holds" if residual <= tol else "violated"
                    verdicts.append(TripleVerdict(quad, verdict, residual,
                                                  xi[worst].copy()))
    return NullReport(verdicts, tol, n_samples)


# ---------------------------------------------------------------------------
# example families
# ---------------------------------------------------------------------------

def _lift_quadratic(b):
    """Quasilinear tensor from a time-derivative lift of the quadratic form.

    The product rule distributes the extra time derivative over both
    factors; Hessian slots are half-split so each equation's tensor is
    symmetric in (k,l).  Averaging over the energy-symmetry involution then
    makes the cross-equation condition hold exactly; the involution maps a
    speed-equal triple to a speed-equal triple with a relabelled cone
    contraction, so null triples stay null.
    """
    D, s = b.shape[0], b.shape[-1]
    sym = 0.5 * (b + np.transpose(b, (0, 2, 1, 4, 3)))
    q = np.zeros((D, D, D, s, s, s))
    q[..., 0] += sym
    q[..., 0, :] += sym
    return 0.5 * (q + _symmetry_partner_quadratic(q))


def _lift_cubic(b3):
    """Same construction one degree up: time-lift of the 2D cubic form."""
    D, s = b3.shape[0], b3.shape[-1]
    q3 = np.zeros((D, D, D, D, s, s, s, s))
    # Hessian falls on each factor in turn; reorder so it sits in the last
    # component slot, then half-split its two derivative slots.
    lift_j = np.transpose(b3, (0, 2, 3, 1, 5, 6, 4))   # hessian on the j factor
    lift_k = np.transpose(b3, (0, 1, 3, 2, 4, 6, 5))   # hessian on the k factor
    lift_l = b3                                        # hessian on the l factor
    for t in (lift_j, lift_k, lift_l):
        q3[..., 0] += 0.5 * t
        q3[..., 0, :] += 0.5 * t
    return 0.5 * (q3 + _symmetry_partner_cubic(q3))


def make_example_system(speeds, kappa, lam=None, dim=3):
    """The standard global-existence example family.

    Equal-speed pairs (J,K) contribute ``kappa[J,K]`` times the classical
    null form (time product minus speed-squared gradient product) to every
    equation of that speed; pairs with distinct speeds contribute
    ``lam[J,K]`` times the time-time cross term, which is exempt from the
    null requirement.  The quasilinear part is the symmetrized
    time-derivative lift of the quadratic part.
    """
    speeds = np.asarray(speeds, dtype=np.float64)
    D, s = speeds.size, dim + 1
    kappa = np.asarray(kappa, dtype=np.float64)
    if kappa.shape == ():
        kappa = kappa.reshape(1, 1)
    if kappa.shape != (D, D):
        raise ValueError(f"kappa must be ({D},{D}), got {kappa.shape}")
    if lam is None:
        lam = np.zeros((D, D))
    lam = np.asarray(lam, dtype=np.float64)
    if lam.shape != (D, D):
        raise ValueError(f"lam must be ({D},{D}), got {lam.shape}")
    for cj in range(D):
        for ck in range(D):
            if kappa[cj, ck] != 0.0 and speeds[cj] != speeds[ck]:
                raise ValueError("kappa entries must pair equal speeds")
            if lam[cj, ck] != 0.0 and speeds[cj] == speeds[ck]:
                raise ValueError("lam entries must pair unequal speeds")
    b = np.zeros((D, D, D, s, s))
    for ci in range(D):
        c2 = speeds[ci] ** 2
        for cj in range(D):
            for ck in range(D):
                if speeds[cj] == speeds[ck] == speeds[ci]:
                    b[ci, cj, ck, 0, 0] += kappa[cj, ck]
                    for a in range(1, s):
                        b[ci, cj, ck, a, a] -= c2 * kappa[cj, ck]
                else:
                    b[ci, cj, ck, 0, 0] += lam[cj, ck]
    return CoefficientSet(dim, speeds, b, _lift_quadratic(b))


def make_cubic_example(c, lam):
    """2D cubic family: time derivative times the classical null form.

    ``lam[J]`` weights the factor pair (equation component, J): equation I
    receives ``lam[J] * d_t u_I * ((d_t u_J)^2 - c^2 |grad u_J|^2)``.  The
    quasilinear part is the symmetrized time-derivative lift.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=np.float64))
    D, s = lam.size, 3
    c = float(c)
    b3 = np.zeros((D, D, D, D, s, s, s))
    for ci in range(D):
        for cj in range(D):
            b3[ci, ci, cj, cj, 0, 0, 0] += lam[cj]
            for a in range(1, s):
                b3[ci, ci, cj, cj, 0, a, a] -= c * c * lam[cj]
    return CoefficientSet(2, np.full(D, c),
                          np.zeros((D, D, D, s, s)),
                          np.zeros((D, D, D, s, s, s)),
                          b3, _lift_cubic(b3))


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def evaluate_nonlinearity(cs, grads, hessians=None, validate=True):
    """Contract the coefficient tensors with gradients and Hessians.

    ``grads`` has shape (D, dim+1, ...), ``hessians`` (D, dim+1, dim+1, ...);
    trailing axes broadcast, so a single point and a whole grid both work.
    Returns the (D, ...) vector of nonlinearity values.
    """
    grads = np.asarray(grads, dtype=np.float64)
    D = cs.ncomp
    s = cs.dim + 1
    if grads.shape[:2] != (D, s):
        raise ValueError(f"grads must start with shape ({D},{s})")
    p = cs.packed()
    needs_h = len(p.q_val) or (p.q3_val is not None and len(p.q3_val))
    if needs_h and hessians is None:
        raise ValueError("quasilinear terms require hessians")
    if hessians is not None:
        hessians = np.asarray(hessians, dtype=np.float64)
        if validate:
            asym = np.abs(hessians - np.swapaxes(hessians, 1, 2)).max()
            scale = max(1.0, float(np.abs(hessians).max()))
            if asym > 1e-12 * scale:
                raise ValueError(f"hessians are not symmetric (asymmetry {asym:g})")
    out = np.zeros((D,) + grads.shape[2:])
    for row, val in zip(p.b_idx, p.b_val):
        ci, cj, ck, dj, dk = row
        out[ci] += val * grads[cj, dj] * grads[ck, dk]
    for row, val in zip(p.q_idx, p.q_val):
        ci, cj, ck, dj, dk, dl = row
        out[ci] += val * grads[cj, dj] * hessians[ck, dk, dl]
    for row, val in zip(p.b3_idx, p.b3_val):
        ci, cj, ck, cl, dj, dk, dl = row
        out[ci] += val * grads[cj, dj] * grads[ck, dk] * grads[cl, dl]
    for row, val in zip(p.q3_idx, p.q3_val):
        ci, cj, ck, cl, dj, dk, dl, dm = row
        out[ci] += val * grads[cj, dj] * grads[ck, dk] * hessians[cl, dl, dm]
    return out


# ---------------------------------------------------------------------------
# tangential decomposition bound
# ---------------------------------------------------------------------------

def _tangential_parts(vec, w, omega, c):
    radial = float(omega @ vec[1:])
    tang = vec - w * radial
    return radial, tang


def tangential_bound_check(cs, c, omega, grads_u, grads_v, hess_v=None,
                           triple=(1, 1, 1)):
    """Pointwise null-form bound and exact cone decomposition.

    Works in frozen-direction covector algebra at one point: ``omega`` is
    the unit spatial direction, the cone covector is (-c, omega).  Checks
    that the quadratic form equals its tangential decomposition to roundoff
    and that it is bounded by C (|tang u||v'| + |u'||tang v|), with C the
    crude combinatorial constant (dim+2)^2 times the coefficient mass.
    The curvature term of the quasilinear bound (the 1/<r> part) is a field
    quantity and is left to the grid diagnostics.
    """
    omega = np.asarray(omega, dtype=np.float64)
    n = cs.dim
    if omega.shape != (n,) or abs(np.linalg.norm(omega) - 1.0) > 1e-12:
        raise ValueError("omega must be a unit vector of length dim")
    g = np.asarray(grads_u, dtype=np.float64)
    h = np.asarray(grads_v, dtype=np.float64)
    ti, tj, tk = (t - 1 for t in triple)
    B = cs.b[ti, tj, tk]
    Q = cs.q[ti, tj, tk]
    w = np.concatenate([[-c], omega])

    g_r, g_tan = _tangential_parts(g, w, omega, c)
    h_r, h_tan = _tangential_parts(h, w, omega, c)

    direct = float(g @ B @ h)
    decomposition = float(g_tan @ B @ h + g_r * (w @ B @ h_tan))
    mass_b = float(np.abs(B).sum())
    scale = max(1.0, mass_b) * max(1.0, c) ** 2 \
        * max(1.0, np.abs(g).max()) * max(1.0, np.abs(h).max())
    residual = abs(direct - decomposition)
    if residual > 1e-12 * scale:
        raise RuntimeError(
            f"tangential decomposition violated: residual {residual:g} "
            f"(the form must satisfy the null condition at speed {c})")

    constant = (n + 2) ** 2 * mass_b
    lhs = abs(direct)
    rhs = constant * (np.linalg.norm(g_tan) * np.linalg.norm(h)
                      + np.linalg.norm(g) * np.linalg.norm(h_tan))
    if lhs > rhs + 1e-12 * scale:
        raise RuntimeError(f"tangential bound violated: {lhs:g} > {rhs:g}")
    out = {"lhs": lhs, "rhs": rhs, "constant": constant,
           "decomposition": decomposition, "residual": residual}

    if hess_v is not None and Q.any():
        H = np.asarray(hess_v, dtype=np.float64)
        radial_H = omega @ H[1:]                     # first slot contracted
        TH = H - np.outer(w, radial_H)
        radial_TH = float(omega @ radial_H[1:])
        THr = radial_H - w * radial_TH
        direct_q = float(np.einsum("jkl,j,kl->", Q, g, H))
        decomp_q = float(np.einsum("jkl,j,kl->", Q, g_tan, H)
                         + g_r * np.einsum("jkl,j,kl->", Q, w, TH)
                         + g_r * np.einsum("jkl,j,k,l->", Q, w, w, THr))
        mass_q = float(np.abs(Q).sum())
        scale_q = max(1.0, mass_q) * max(1.0, c) ** 3 \
            * max(1.0, np.abs(g).max()) * max(1.0, np.abs(H).max())
        residual_q = abs(direct_q - decomp_q)
        if residual_q > 1e-12 * scale_q:
            raise RuntimeError(
                f"quasilinear decomposition violated: residual {residual_q:g}")
        const_q = (n + 2) ** 2 * mass_q
        tang_second = np.sqrt(np.linalg.norm(TH) ** 2 + np.linalg.norm(THr) ** 2)
        lhs_q = abs(direct_q)
        rhs_q = const_q * (np.linalg.norm(g_tan) * np.linalg.norm(H)
                           + np.linalg.norm(g) * tang_second)
        if lhs_q > rhs_q + 1e-12 * scale_q:
            raise RuntimeError(f"quasilinear tangential bound violated")
        out.update({"q_lhs": lhs_q, "q_rhs": rhs_q, "q_constant": const_q,
                    "q_decomposition": decomp_q, "q_residual": residual_q})
    return out


# ---------------------------------------------------------------------------
# JSON wire format
# ---------------------------------------------------------------------------

def _entries_to_wire(t, ncomp_axes):
    out = []
    for raw in np.argwhere(t != 0.0):
        idx = [int(v) + 1 for v in raw[:ncomp_axes]] + [int(v) for v in raw[ncomp_axes:]]
        out.append([idx, float(t[tuple(raw)])])
    out.sort(key=lambda e: e[0])
    return out


def _entries_from_wire(entries, shape, ncomp_axes, name):
    t = np.zeros(shape)
    for idx, val in entries:
        full = tuple(int(v) - 1 for v in idx[:ncomp_axes]) + tuple(int(v) for v in idx[ncomp_axes:])
        for ax, v in enumerate(full):
            if not 0 <= v < shape[ax]:
                raise ValueError(f"{name} entry index {idx} out of range")
        t[full] = float(val)
    return t


def coefficients_to_dict(cs):
    doc = {
        "dim": cs.dim,
        "speeds": [float(c) for c in cs.speeds],
        "B": _entries_to_wire(cs.b, 3),
        "Q": _entries_to_wire(cs.q, 3),
    }
    if cs.b3 is not None:
        doc["B3"] = _entries_to_wire(cs.b3, 4)
    if cs.q3 is not None:
        doc["Q3"] = _entries_to_wire(cs.q3, 4)
    return doc


def coefficients_from_dict(doc):
    dim = int(doc["dim"])
    speeds = np.asarray(doc["speeds"], dtype=np.float64)
    D, s = speeds.size, dim + 1
    b = _entries_from_wire(doc.get("B", []), (D, D, D, s, s), 3, "B")
    q = _entries_from_wire(doc.get("Q", []), (D, D, D, s, s, s), 3, "Q")
    b3 = q3 = None
    if "B3" in doc or "Q3" in doc:
        if dim != 2:
            raise ValueError("cubic tensors require dim == 2")
        b3 = _entries_from_wire(doc.get("B3", []), (D, D, D, D, s, s, s), 4, "B3")
        q3 = _entries_from_wire(doc.get("Q3", []), (D, D, D, D, s, s, s, s), 4, "Q3")
    return CoefficientSet(dim, speeds, b, q, b3, q3)


def save_coefficients(cs, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(coefficients_to_dict(cs), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_coefficients(path):
    with open(path, encoding="utf-8") as fh:
        return coefficients_from_dict(json.load(fh))
