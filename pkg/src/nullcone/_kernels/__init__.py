"""Kernel backend selection.

The compiled extension is preferred when it imports; the NumPy twin keeps
everything runnable without a build step.  ``NULLCONE_KERNELS`` forces a
backend (``compiled`` or ``python``); ``NULLCONE_THREADS`` seeds the worker
count used by the compiled grid loops.
"""

import os
from collections import namedtuple

import numpy as np

_requested = os.environ.get("NULLCONE_KERNELS", "auto").strip().lower()

if _requested in ("", "auto", "compiled"):
    try:
        from . import _stencil as _impl
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _fallback as _impl
        BACKEND = "python"
elif _requested == "python":
    from . import _fallback as _impl
    BACKEND = "python"
else:
    raise ValueError(f"NULLCONE_KERNELS must be 'auto', 'compiled' or 'python', got {_requested!r}")

det_sum = _impl.det_sum
set_num_threads = _impl.set_num_threads
get_num_threads = _impl.get_num_threads

set_num_threads(int(os.environ.get("NULLCONE_THREADS", "1") or "1"))

EMPTY_IDX5 = np.zeros((0, 5), dtype=np.int32)
EMPTY_IDX6 = np.zeros((0, 6), dtype=np.int32)
EMPTY_IDX7 = np.zeros((0, 7), dtype=np.int32)
EMPTY_IDX8 = np.zeros((0, 8), dtype=np.int32)
EMPTY_VAL = np.zeros(0, dtype=np.float64)

PackedEntries = namedtuple(
    "PackedEntries",
    ["b_idx", "b_val", "q_idx", "q_val", "b3_idx", "b3_val", "q3_idx", "q3_val"],
)

EMPTY_ENTRIES = PackedEntries(
    EMPTY_IDX5, EMPTY_VAL, EMPTY_IDX6, EMPTY_VAL,
    EMPTY_IDX7, EMPTY_VAL, EMPTY_IDX8, EMPTY_VAL,
)


def step(un, uc, up, c2, dt, h, entries=EMPTY_ENTRIES, up2=None, mask=None):
    """One leapfrog sweep.  Returns sup over interior nodes of |u'|^2.

    Writes ``2 uc - up + dt^2 (c^2 lap + F)`` into the interior of ``un``;
    the boundary ring is never touched and masked nodes are pinned to zero.
    """
    ndim = uc.ndim - 1
    needs_prev2 = len(entries.q_val) > 0 or len(entries.q3_val) > 0
    if needs_prev2 and up2 is None:
        raise ValueError("quasilinear terms require the level at t - 2*dt")
    if uc.shape[0] > 4:
        raise ValueError("kernels support at most 4 components")
    c2 = np.ascontiguousarray(c2, dtype=np.float64)
    if ndim == 1:
        return _impl.step_1d(un, uc, up, up2, c2, dt, h,
                             entries.b_idx, entries.b_val,
                             entries.q_idx, entries.q_val, mask)
    if ndim == 2:
        return _impl.step_2d(un, uc, up, up2, c2, dt, h,
                             entries.b_idx, entries.b_val,
                             entries.q_idx, entries.q_val,
                             entries.b3_idx, entries.b3_val,
                             entries.q3_idx, entries.q3_val, mask)
    if ndim == 3:
        return _impl.step_3d(un, uc, up, up2, c2, dt, h,
                             entries.b_idx, entries.b_val,
                             entries.q_idx, entries.q_val, mask)
    raise ValueError(f"unsupported dimension {ndim}")


def energy_pair(uc, up, c2, dt, h, mask=None):
    """(conserved-form energy, midpoint energy integral, sup |u'|^2) of a frame."""
    ndim = uc.ndim - 1
    c2 = np.ascontiguousarray(c2, dtype=np.float64)
    if BACKEND == "python":
        return _impl.energy_pair(uc, up, c2, dt, h, mask)
    if ndim == 1:
        return _impl.energy_pair_1d(uc, up, c2, dt, h, mask)
    if ndim == 2:
        return _impl.energy_pair_2d(uc, up, c2, dt, h, mask)
    if ndim == 3:
        return _impl.energy_pair_3d(uc, up, c2, dt, h, mask)
    raise ValueError(f"unsupported dimension {ndim}")
