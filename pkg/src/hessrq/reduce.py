"""Reduction phase: record, per shift, the rotation sequences and cross-over
columns that triangularize the shifted matrix, tile column by tile column.

The tile-level entry points at the bottom (reduce_diag, reduce_offdiag and
their complex variants) mirror the kernels one-to-one and exist for direct
use and testing; tiled_reduce drives them over the whole matrix through the
task graph.
"""

from __future__ import annotations

import numpy as np

from . import _kernels, flops, scheduler
from .core import (
    CrossoverSet,
    GivensTable,
    StructuralViolationError,
    interleave_complex,
)

__all__ = [
    "tiled_reduce",
    "reduce_diag",
    "reduce_offdiag",
    "creduce_diag",
    "creduce_offdiag",
]


def _raise_reduce_status(status, tile_j, batch_lo):
    kind, l, row = _kernels.unpack_status(status)
    raise StructuralViolationError(
        f"degenerate rotation in tile column {tile_j} at local row {row}, "
        f"shift {batch_lo + l} (both pivot entries are zero)"
    )


def tiled_reduce(h, grid, shifts, *, workers=1, stats=None, workspace=None):
    """Compute the GivensTable and CrossoverSet for a batch of shifts.

    Sweeps tile columns right to left.  The diagonal tile of each column
    yields the column's rotations; offdiagonal tiles propagate the
    cross-over columns leftwards, with the shift applied only on the tile
    touching the diagonal.
    """
    kern = _kernels.get_backend()
    hd = h.data
    n = h.n
    N = grid.N
    m = shifts.m
    cplx = shifts.is_complex

    def take(key, shape, crossover=False):
        if workspace is None:
            return np.empty(shape)
        return workspace.take(key, shape, crossover=crossover)

    if cplx:
        c_re = take("c_re", (n, m))
        c_im = take("c_im", (n, m))
        s_arr = take("s", (n, m))
        cross = take("cross", (n, N, 2 * m), crossover=True)
        lam_re = np.ascontiguousarray(shifts.values.real)
        lam_im = np.ascontiguousarray(shifts.values.imag)
        cross[:, N - 1, 0::2] = hd[:, n - 1 : n]
        cross[:, N - 1, 1::2] = 0.0
        cross[n - 1, N - 1, 0::2] -= lam_re
        cross[n - 1, N - 1, 1::2] -= lam_im
        table = GivensTable(c_re=c_re, s=s_arr, c_im=c_im)
    else:
        c_re = take("c_re", (n, m))
        c_im = None
        s_arr = take("s", (n, m))
        cross = take("cross", (n, N, m), crossover=True)
        lam = np.ascontiguousarray(shifts.values)
        cross[:, N - 1, :] = hd[:, n - 1 : n]
        cross[n - 1, N - 1, :] -= lam
        table = GivensTable(c_re=c_re, s=s_arr)

    zeros_cache = {}

    def zeros_like_lam(width):
        z = zeros_cache.get(width)
        if z is None:
            z = np.zeros(width)
            zeros_cache[width] = z
        return z

    def body_factory(kind, i, jt, bi):
        ls, le = shifts.ranges[bi]
        b = le - ls

        if kind == "ReduceDiag":
            js, je = grid.ranges[jt]
            k = je - js

            def run_diag():
                hdiag = np.ascontiguousarray(hd[js:je, js : je - 1])
                if jt > 0:
                    hleft = np.ascontiguousarray(hd[js:je, js - 1])
                    has_left = True
                else:
                    hleft = np.zeros(k)
                    has_left = False
                if cplx:
                    rright = np.ascontiguousarray(cross[js:je, jt, 2 * ls : 2 * le])
                    co = np.empty((k, b))
                    cio = np.empty((k, b))
                    so = np.empty((k, b))
                    status = kern.creduce_diag(
                        hdiag, hleft, has_left, lam_re[ls:le], lam_im[ls:le], rright, co, cio, so
                    )
                    if status != 0:
                        _raise_reduce_status(status, jt, ls)
                    c_re[js:je, ls:le] = co
                    c_im[js:je, ls:le] = cio
                    s_arr[js:je, ls:le] = so
                else:
                    rright = np.ascontiguousarray(cross[js:je, jt, ls:le])
                    co = np.empty((k, b))
                    so = np.empty((k, b))
                    status = kern.reduce_diag(hdiag, hleft, has_left, lam[ls:le], rright, co, so)
                    if status != 0:
                        _raise_reduce_status(status, jt, ls)
                    c_re[js:je, ls:le] = co
                    s_arr[js:je, ls:le] = so

            if stats is None:
                return run_diag
            fl = flops.reduce_diag_flops(k, b, cplx)
            fo = b * flops.formula_flops("ReduceDiag", (k,), cplx)
            return lambda: stats.timed("ReduceDiag", run_diag, fl, fo)

        # offdiagonal tile
        js, je = grid.ranges[jt]
        is_, ie = grid.ranges[i]
        k = ie - is_
        w = je - js
        shifted = kind == "ReduceOffdiagShifted"

        def run_off():
            htile = np.ascontiguousarray(hd[is_:ie, js - 1 : je - 1])
            if cplx:
                ct = np.ascontiguousarray(c_re[js:je, ls:le])
                cit = np.ascontiguousarray(c_im[js:je, ls:le])
                st = np.ascontiguousarray(s_arr[js:je, ls:le])
                rright = np.ascontiguousarray(cross[is_:ie, jt, 2 * ls : 2 * le])
                rleft = np.empty((k, 2 * b))
                lre = lam_re[ls:le] if shifted else zeros_like_lam(b)
                lim = lam_im[ls:le] if shifted else zeros_like_lam(b)
                kern.creduce_offdiag(htile, lre, lim, ct, cit, st, rright, rleft)
                cross[is_:ie, jt - 1, 2 * ls : 2 * le] = rleft
            else:
                ct = np.ascontiguousarray(c_re[js:je, ls:le])
                st = np.ascontiguousarray(s_arr[js:je, ls:le])
                rright = np.ascontiguousarray(cross[is_:ie, jt, ls:le])
                rleft = np.empty((k, b))
                la = lam[ls:le] if shifted else zeros_like_lam(b)
                kern.reduce_offdiag(htile, la, ct, st, rright, rleft)
                cross[is_:ie, jt - 1, ls:le] = rleft

        if stats is None:
            return run_off
        fl = flops.reduce_offdiag_flops(k, w, b, cplx)
        fo = b * flops.formula_flops("ReduceOffdiag", (k, w), cplx)
        return lambda: stats.timed("ReduceOffdiag", run_off, fl, fo)

    graph = scheduler.build_reduce_dag(grid, shifts.M, body_factory)
    scheduler.execute(graph, workers=workers)
    return table, CrossoverSet(data=cross, is_complex=cplx)


# ---------------------------------------------------------------------------
# Tile-level entry points
# ---------------------------------------------------------------------------


def _as_batch(values):
    a = np.asarray(values, dtype=np.float64)
    return np.ascontiguousarray(np.atleast_1d(a))


def _as_cols(arr, b):
    a = np.asarray(arr, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.shape[1] != b:
        raise ValueError(f"expected {b} columns, got {a.shape[1]}")
    return np.ascontiguousarray(a)


def reduce_diag(h_tile, h_left, shifts, r_right):
    """Rotations triangularizing one shifted diagonal tile.

    ``h_left`` is the column to the left of the tile, or None for the
    top-left tile (the recorded row-0 rotation is then identity padding).
    Returns (c, s) arrays of shape (k, len(shifts)).
    """
    lam = _as_batch(shifts)
    b = lam.shape[0]
    rr = _as_cols(r_right, b)
    k = rr.shape[0]
    hdiag = np.ascontiguousarray(np.asarray(h_tile, dtype=np.float64).reshape(k, -1))
    has_left = h_left is not None
    hl = np.ascontiguousarray(np.asarray(h_left, dtype=np.float64)) if has_left else np.zeros(k)
    c = np.empty((k, b))
    s = np.empty((k, b))
    status = _kernels.get_backend().reduce_diag(hdiag, hl, has_left, lam, rr, c, s)
    if status != 0:
        _raise_reduce_status(status, -1, 0)
    return c, s


def reduce_offdiag(h_tile, r_right, c, s, shifts=None):
    """Left cross-over columns for one offdiagonal tile.

    ``shifts=None`` is the far-from-diagonal case (no shift contribution);
    pass the batch for the tile directly above a diagonal tile.
    """
    ht = np.ascontiguousarray(np.asarray(h_tile, dtype=np.float64))
    k = ht.shape[0]
    b = c.shape[1] if np.asarray(c).ndim == 2 else 1
    cc = _as_cols(c, b)
    ss = _as_cols(s, b)
    rr = _as_cols(r_right, b)
    lam = _as_batch(shifts) if shifts is not None else np.zeros(b)
    out = np.empty((k, b))
    _kernels.get_backend().reduce_offdiag(ht, lam, cc, ss, rr, out)
    return out


def creduce_diag(h_tile, h_left, shifts, r_right):
    """Complex-shift reduce_diag; returns (c_re, c_im, s).

    ``r_right`` may be complex (n, b) or interleaved real (n, 2b).
    """
    lam = np.atleast_1d(np.asarray(shifts, dtype=np.complex128))
    b = lam.shape[0]
    rr = np.asarray(r_right)
    rr2 = interleave_complex(rr) if np.iscomplexobj(rr) else _as_cols(rr, 2 * b)
    k = rr2.shape[0]
    hdiag = np.ascontiguousarray(np.asarray(h_tile, dtype=np.float64).reshape(k, -1))
    has_left = h_left is not None
    hl = np.ascontiguousarray(np.asarray(h_left, dtype=np.float64)) if has_left else np.zeros(k)
    c_re = np.empty((k, b))
    c_im = np.empty((k, b))
    s = np.empty((k, b))
    status = _kernels.get_backend().creduce_diag(
        hdiag,
        hl,
        has_left,
        np.ascontiguousarray(lam.real),
        np.ascontiguousarray(lam.imag),
        rr2,
        c_re,
        c_im,
        s,
    )
    if status != 0:
        _raise_reduce_status(status, -1, 0)
    return c_re, c_im, s


def creduce_offdiag(h_tile, r_right, c_re, c_im, s, shifts=None):
    ht = np.ascontiguousarray(np.asarray(h_tile, dtype=np.float64))
    k = ht.shape[0]
    b = c_re.shape[1]
    rr = np.asarray(r_right)
    rr2 = interleave_complex(rr) if np.iscomplexobj(rr) else _as_cols(rr, 2 * b)
    if shifts is not None:
        lam = np.atleast_1d(np.asarray(shifts, dtype=np.complex128))
        lre = np.ascontiguousarray(lam.real)
        lim = np.ascontiguousarray(lam.imag)
    else:
        lre = np.zeros(b)
        lim = np.zeros(b)
    out = np.empty((k, 2 * b))
    _kernels.get_backend().creduce_offdiag(
        ht, lre, lim, _as_cols(c_re, b), _as_cols(c_im, b), _as_cols(s, b), rr2, out
    )
    return out
