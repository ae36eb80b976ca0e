"""Baseline solvers: single-sweep RQ per shift, Hessenberg LU with partial
pivoting, and a dense LU oracle for tests and verification."""

from __future__ import annotations

import numpy as np

from . import _kernels
from .core import (
    HessrqError,
    SingularSystemError,
    StructuralViolationError,
    as_hessenberg,
)
from .overflow import OverflowBudget, robust_trsv, robust_trsv_complex

__all__ = ["henry_rq_solve", "hessenberg_lu_invit", "dense_solve_oracle"]


def henry_rq_solve(h, lam, b):
    """Solve (H - lam I) x = b in one merged factor-and-substitute sweep.

    ``lam`` may be a scalar or a batch; complex shifts run in full complex
    arithmetic.  H is never modified.
    """
    h = as_hessenberg(h)
    n = h.n
    lam_arr = np.atleast_1d(np.asarray(lam))
    single_shift = np.isscalar(lam) or np.asarray(lam).ndim == 0
    cplx = np.iscomplexobj(lam_arr)
    m = lam_arr.shape[0]
    bb = np.asarray(b)
    single_col = bb.ndim == 1
    kern = _kernels.get_backend()
    if cplx:
        x = np.ascontiguousarray(
            np.asarray(bb, dtype=np.complex128).reshape(n, m), dtype=np.complex128
        ).copy()
        status = kern.henry_solve_complex(h.data, np.ascontiguousarray(lam_arr, dtype=np.complex128), x)
    else:
        x = np.ascontiguousarray(np.asarray(bb, dtype=np.float64).reshape(n, m)).copy()
        status = kern.henry_solve_real(h.data, np.ascontiguousarray(lam_arr, dtype=np.float64), x)
    if status != 0:
        kind, l, row = _kernels.unpack_status(status)
        if kind == _kernels.KIND_DEGENERATE:
            raise StructuralViolationError(
                f"zero pivot pair at row {row} (matrix not unreduced?)"
            )
        raise SingularSystemError(
            f"zero pivot phi for shift {l} at row {row}", shift_index=l, local_index=row
        )
    if single_col and single_shift:
        return x[:, 0]
    return x


def hessenberg_lu_invit(h, lam, b, budget=None, return_pivots=False):
    """LU-with-partial-pivoting baseline for one shifted Hessenberg solve.

    Forms H - lam I in a workspace, eliminates one subdiagonal entry per
    column (pivoting between adjacent rows only), forward-eliminates b
    alongside, and solves the triangular factor robustly: the result
    satisfies (H - lam I) x = alpha b with alpha in (0,1].
    """
    h = as_hessenberg(h)
    n = h.n
    cplx = np.iscomplexobj(np.asarray(lam))
    dtype = np.complex128 if cplx else np.float64
    a = np.array(h.data, dtype=dtype)
    a[np.diag_indices(n)] -= lam
    y = np.array(b, dtype=dtype).ravel().copy()
    if y.shape[0] != n:
        raise HessrqError(f"rhs length {y.shape[0]} != n = {n}")
    pivots = np.zeros(n - 1, dtype=bool)
    for j in range(n - 1):
        if abs(a[j + 1, j]) > abs(a[j, j]):
            a[[j, j + 1], j:] = a[[j + 1, j], j:]
            y[[j, j + 1]] = y[[j + 1, j]]
            pivots[j] = True
        if a[j, j] == 0.0:
            if a[j + 1, j] != 0.0:
                raise SingularSystemError(f"zero pivot at column {j}", local_index=j)
            continue
        mult = a[j + 1, j] / a[j, j]
        if mult != 0.0:
            a[j + 1, j:] -= mult * a[j, j:]
            y[j + 1] -= mult * y[j]
        a[j + 1, j] = 0.0
    if budget is None:
        budget = OverflowBudget.for_tile_rows(1)
    if cplx:
        x, alpha = robust_trsv_complex(a, y, budget)
    else:
        x, alpha = robust_trsv(a, y, budget)
    if return_pivots:
        return x, alpha, pivots
    return x, alpha


def dense_solve_oracle(a, b):
    """Plain partial-pivoting LU solve of a general square system.

    Test and verification oracle only; the caller keeps A nonsingular and
    reasonably conditioned (strongly ill-conditioned inputs are outside
    the oracle's contract).
    """
    a = np.asarray(a)
    try:
        return np.linalg.solve(a, np.asarray(b))
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
