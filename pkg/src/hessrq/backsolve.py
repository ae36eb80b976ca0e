"""Backward-substitution and backtransform phases.

``tiled_solve`` is the plain bottom-to-top sweep; ``robust_tiled_solve``
is the guarded variant carrying segment-wise scaling factors.  Both share
one driver: the guarded kernels skip their protection logic when
``robust`` is off, and when protection is on but never triggers the
executed arithmetic is identical, so the two paths agree bitwise on
benign data.

``dhsrq3``/``chsrq3`` bundle reduction and substitution into the
simultaneous shifted-system solvers for real and complex shift batches.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels, flops, scheduler
from .core import (
    ConfigError,
    ScalingMatrix,
    ShiftBatch,
    SingularSystemError,
    SolutionBlock,
    TileGrid,
    as_hessenberg,
    deinterleave_complex,
    interleave_complex,
)
from .overflow import OverflowBudget
from .reduce import tiled_reduce

__all__ = [
    "tiled_solve",
    "robust_tiled_solve",
    "dhsrq3",
    "chsrq3",
    "solve_tile",
    "rsolve_tile",
    "update_tile",
    "rupdate_tile",
    "backtransform",
    "rbacktransform",
    "csolve_tile",
    "crsolve_tile",
]

_MODES = {"solve": 0, "eigvec": 1}


def _raise_singular(status, batch_lo):
    kind, l, row = _kernels.unpack_status(status)
    raise SingularSystemError(
        f"singular triangular factor for shift {batch_lo + l} (local row {row})",
        shift_index=batch_lo + l,
        local_index=row,
    )


def _substitute(h, grid, shifts, table, crossover, b, robust, mode, workers, stats, budget):
    kern = _kernels.get_backend()
    hd = h.data
    n = h.n
    N = grid.N
    m = shifts.m
    cplx = shifts.is_complex
    mode_i = _MODES[mode]

    if cplx:
        x = interleave_complex(np.asarray(b, dtype=np.complex128).reshape(n, m))
    else:
        x = np.array(np.asarray(b, dtype=np.float64).reshape(n, m), order="C")
    alpha = np.ones((N, m))
    alpha_cols = np.ones(m)
    norms = np.full(m, np.nan)
    omega = budget.omega if robust else math.inf
    tile_ends = np.array([e for (_s, e) in grid.ranges], dtype=np.int64)

    if cplx:
        lam_re = np.ascontiguousarray(shifts.values.real)
        lam_im = np.ascontiguousarray(shifts.values.imag)
    else:
        lam = np.ascontiguousarray(shifts.values)
    zeros_cache = {}

    def zeros_width(width):
        z = zeros_cache.get(width)
        if z is None:
            z = np.zeros(width)
            zeros_cache[width] = z
        return z

    cross = crossover.data
    c_re = table.c_re
    c_im = table.c_im
    s_arr = table.s

    def solve_one_tile(jt, ls, le):
        js, je = grid.ranges[jt]
        k = je - js
        bw = le - ls
        hdiag = np.ascontiguousarray(hd[js:je, js : je - 1])
        if jt > 0:
            hleft = np.ascontiguousarray(hd[js:je, js - 1])
            has_left = True
        else:
            hleft = np.zeros(k)
            has_left = False
        beta = alpha[jt, ls:le]
        if cplx:
            rright = np.ascontiguousarray(cross[js:je, jt, 2 * ls : 2 * le])
            xt = np.ascontiguousarray(x[js:je, 2 * ls : 2 * le])
            status = kern.csolve_crsolve(
                hdiag,
                hleft,
                has_left,
                lam_re[ls:le],
                lam_im[ls:le],
                rright,
                np.ascontiguousarray(c_re[js:je, ls:le]),
                np.ascontiguousarray(c_im[js:je, ls:le]),
                np.ascontiguousarray(s_arr[js:je, ls:le]),
                xt,
                beta,
                robust,
                omega,
            )
            if status != 0:
                _raise_singular(status, ls)
            x[js:je, 2 * ls : 2 * le] = xt
        else:
            rright = np.ascontiguousarray(cross[js:je, jt, ls:le])
            xt = np.ascontiguousarray(x[js:je, ls:le])
            status = kern.solve_rsolve(
                hdiag,
                hleft,
                has_left,
                lam[ls:le],
                rright,
                np.ascontiguousarray(c_re[js:je, ls:le]),
                np.ascontiguousarray(s_arr[js:je, ls:le]),
                xt,
                beta,
                robust,
                omega,
            )
            if status != 0:
                _raise_singular(status, ls)
            x[js:je, ls:le] = xt
        return k, bw

    def body_factory(kind, i, jt, bi):
        ls, le = shifts.ranges[bi]
        bw = le - ls

        if kind == "SolveTile":
            js, je = grid.ranges[jt]
            k = je - js

            def run_solve():
                solve_one_tile(jt, ls, le)

            if stats is None:
                return run_solve
            fl = flops.solve_flops(k, bw, cplx)
            fo = bw * flops.formula_flops("Solve", (k,), cplx)
            return lambda: stats.timed("Solve", run_solve, fl, fo)

        if kind in ("UpdateShifted", "UpdateFar"):
            js, je = grid.ranges[jt]
            is_, ie = grid.ranges[i]
            mrows = ie - is_
            k = je - js
            shifted = kind == "UpdateShifted"

            def run_update():
                htile = np.ascontiguousarray(hd[is_:ie, js - 1 : je - 1])
                ab = alpha[jt, ls:le]
                bt = alpha[i, ls:le]
                if cplx:
                    rright = np.ascontiguousarray(cross[is_:ie, jt, 2 * ls : 2 * le])
                    xb = np.ascontiguousarray(x[js:je, 2 * ls : 2 * le])
                    btile = np.ascontiguousarray(x[is_:ie, 2 * ls : 2 * le])
                    lre = lam_re[ls:le] if shifted else zeros_width(bw)
                    lim = lam_im[ls:le] if shifted else zeros_width(bw)
                    kern.cupdate_crupdate(
                        htile,
                        rright,
                        ab,
                        xb,
                        lre,
                        lim,
                        shifted,
                        np.ascontiguousarray(c_re[js:je, ls:le]),
                        np.ascontiguousarray(c_im[js:je, ls:le]),
                        np.ascontiguousarray(s_arr[js:je, ls:le]),
                        bt,
                        btile,
                        robust,
                        omega,
                    )
                    x[is_:ie, 2 * ls : 2 * le] = btile
                else:
                    rright = np.ascontiguousarray(cross[is_:ie, jt, ls:le])
                    xb = np.ascontiguousarray(x[js:je, ls:le])
                    btile = np.ascontiguousarray(x[is_:ie, ls:le])
                    la = lam[ls:le] if shifted else zeros_width(bw)
                    kern.update_rupdate(
                        htile,
                        rright,
                        ab,
                        xb,
                        la,
                        shifted,
                        np.ascontiguousarray(c_re[js:je, ls:le]),
                        np.ascontiguousarray(s_arr[js:je, ls:le]),
                        bt,
                        btile,
                        robust,
                        omega,
                    )
                    x[is_:ie, ls:le] = btile

            if stats is None:
                return run_update
            fl = flops.update_flops(mrows, k, bw, cplx)
            fo = bw * flops.formula_flops("Update", (mrows, k), cplx)
            return lambda: stats.timed("Update", run_update, fl, fo)

        # merged top-left solve + backtransform
        js, je = grid.ranges[0]
        k = je - js

        def run_merged():
            def solve_part():
                solve_one_tile(0, ls, le)

            if stats is None:
                solve_part()
            else:
                stats.timed(
                    "Solve",
                    solve_part,
                    flops.solve_flops(k, bw, cplx),
                    bw * flops.formula_flops("Solve", (k,), cplx),
                )

            def bt_part():
                if cplx:
                    xf = np.ascontiguousarray(x[:, 2 * ls : 2 * le])
                    ct = np.ascontiguousarray(c_re[:, ls:le])
                    cit = np.ascontiguousarray(c_im[:, ls:le])
                    st = np.ascontiguousarray(s_arr[:, ls:le])
                    if robust:
                        kern.crbacktransform(
                            ct,
                            cit,
                            st,
                            np.ascontiguousarray(alpha[:, ls:le]),
                            tile_ends,
                            xf,
                            norms[ls:le],
                            alpha_cols[ls:le],
                            mode_i,
                            omega,
                        )
                    else:
                        kern.cbacktransform(ct, cit, st, xf)
                    x[:, 2 * ls : 2 * le] = xf
                else:
                    xf = np.ascontiguousarray(x[:, ls:le])
                    ct = np.ascontiguousarray(c_re[:, ls:le])
                    st = np.ascontiguousarray(s_arr[:, ls:le])
                    if robust:
                        kern.rbacktransform(
                            ct,
                            st,
                            np.ascontiguousarray(alpha[:, ls:le]),
                            tile_ends,
                            xf,
                            norms[ls:le],
                            alpha_cols[ls:le],
                            mode_i,
                            omega,
                        )
                    else:
                        kern.backtransform(ct, st, xf)
                    x[:, ls:le] = xf

            if stats is None:
                bt_part()
            else:
                stats.timed(
                    "Backtransform",
                    bt_part,
                    flops.backtransform_flops(n, bw, cplx),
                    bw * flops.formula_flops("Backtransform", (n,), cplx),
                )

        return run_merged

    graph = scheduler.build_solve_dag(grid, shifts.M, body_factory)
    scheduler.execute(graph, workers=workers)

    out = deinterleave_complex(x) if cplx else x
    return SolutionBlock(
        x=out,
        alpha=alpha_cols,
        segment_scales=ScalingMatrix(alpha),
        norms=norms if robust else None,
    )


def tiled_solve(h, grid, shifts, table, crossover, b, *, workers=1, stats=None):
    """Non-robust tiled backward substitution and backtransform.

    May produce non-finite values on growth-prone systems; callers check.
    """
    res = _substitute(
        h, grid, shifts, table, crossover, b,
        robust=False, mode="solve", workers=workers, stats=stats,
        budget=OverflowBudget.for_grid(grid),
    )
    return res.x


def robust_tiled_solve(
    h, grid, shifts, table, crossover, b,
    *, mode="solve", workers=1, stats=None, budget=None,
):
    """Overflow-protected tiled substitution with segment-wise scalings.

    mode="solve": the result satisfies (H - lam_l I) x_l = alpha_l b_l with
    the per-column scale in ``.alpha``.  mode="eigvec": columns are
    normalized to unit 2-norm and ``.norms`` carries the represented norm
    of the unnormalized iterate (what the convergence test consumes).
    """
    if mode not in _MODES:
        raise ConfigError(f"mode must be one of {sorted(_MODES)}")
    if budget is None:
        budget = OverflowBudget.for_grid(grid)
    return _substitute(
        h, grid, shifts, table, crossover, b,
        robust=True, mode=mode, workers=workers, stats=stats, budget=budget,
    )


def _driver(h, shifts, b, kind, *, b_r=None, b_c=32, workers=1, robust=True,
            mode="solve", stats=None, budget=None, workspace=None):
    h = as_hessenberg(h)
    if not h.is_unreduced():
        raise ConfigError("matrix must be unreduced (nonzero subdiagonal)")
    n = h.n
    if b_r is None:
        b_r = min(128, n)
    grid = TileGrid(n, b_r)
    sb = ShiftBatch(shifts, b_c=b_c, kind=kind)
    if kind == "complex":
        bb = np.asarray(b, dtype=np.complex128).reshape(n, sb.m)
    else:
        bb = np.asarray(b, dtype=np.float64).reshape(n, sb.m)
    table, cross = tiled_reduce(h, grid, sb, workers=workers, stats=stats, workspace=workspace)
    if robust:
        return robust_tiled_solve(
            h, grid, sb, table, cross, bb,
            mode=mode, workers=workers, stats=stats, budget=budget,
        )
    x = tiled_solve(h, grid, sb, table, cross, bb, workers=workers, stats=stats)
    return SolutionBlock(
        x=x, alpha=np.ones(sb.m), segment_scales=ScalingMatrix(np.ones((grid.N, sb.m)))
    )


def dhsrq3(h, shifts, b, **kw):
    """Solve (H - lam_l I) x_l = alpha_l b_l simultaneously for real shifts.

    Reduction followed by the robust tiled substitution (pass
    ``robust=False`` for the unguarded variant).  Returns a SolutionBlock;
    ``.x`` columns are the scaled solutions and ``.alpha`` the scales.
    """
    return _driver(h, shifts, b, "real", **kw)


def chsrq3(h, shifts, b, **kw):
    """Complex-shift counterpart of dhsrq3; b and x are complex (n, m)."""
    return _driver(h, shifts, b, "complex", **kw)


# ---------------------------------------------------------------------------
# Tile-level entry points
# ---------------------------------------------------------------------------


def _prep_real(h_tile, h_left, shifts, r_right, c, s, b):
    lam = np.ascontiguousarray(np.atleast_1d(np.asarray(shifts, dtype=np.float64)))
    nb = lam.shape[0]
    rr = np.ascontiguousarray(np.asarray(r_right, dtype=np.float64).reshape(-1, nb))
    k = rr.shape[0]
    hdiag = np.ascontiguousarray(np.asarray(h_tile, dtype=np.float64).reshape(k, -1))
    has_left = h_left is not None
    hl = np.ascontiguousarray(np.asarray(h_left, dtype=np.float64)) if has_left else np.zeros(k)
    cc = np.ascontiguousarray(np.asarray(c, dtype=np.float64).reshape(k, nb))
    ss = np.ascontiguousarray(np.asarray(s, dtype=np.float64).reshape(k, nb))
    xx = np.ascontiguousarray(np.asarray(b, dtype=np.float64).reshape(k, nb)).copy()
    return hdiag, hl, has_left, lam, rr, cc, ss, xx, nb


def solve_tile(h_tile, h_left, shifts, r_right, c, s, b):
    """Small backward substitution on one diagonal tile (unguarded)."""
    hdiag, hl, has_left, lam, rr, cc, ss, xx, nb = _prep_real(
        h_tile, h_left, shifts, r_right, c, s, b
    )
    beta = np.ones(nb)
    status = _kernels.get_backend().solve_rsolve(
        hdiag, hl, has_left, lam, rr, cc, ss, xx, beta, False, math.inf
    )
    if status != 0:
        _raise_singular(status, 0)
    return xx


def rsolve_tile(h_tile, h_left, shifts, r_right, c, s, b, beta, budget):
    """Guarded small substitution; returns (alpha, x) with alpha = gamma*beta."""
    hdiag, hl, has_left, lam, rr, cc, ss, xx, nb = _prep_real(
        h_tile, h_left, shifts, r_right, c, s, b
    )
    alpha = np.ascontiguousarray(np.atleast_1d(np.asarray(beta, dtype=np.float64))).copy()
    status = _kernels.get_backend().solve_rsolve(
        hdiag, hl, has_left, lam, rr, cc, ss, xx, alpha, True, budget.omega
    )
    if status != 0:
        _raise_singular(status, 0)
    return alpha, xx


def update_tile(h_tile, r_right, x_below, shifts, c, s, b):
    """Linear tile update (unguarded); ``shifts=None`` disables the shift."""
    ht = np.ascontiguousarray(np.asarray(h_tile, dtype=np.float64))
    m, k = ht.shape
    shifted = shifts is not None
    nb = np.asarray(c).reshape(k, -1).shape[1]
    lam = (
        np.ascontiguousarray(np.atleast_1d(np.asarray(shifts, dtype=np.float64)))
        if shifted
        else np.zeros(nb)
    )
    rr = np.ascontiguousarray(np.asarray(r_right, dtype=np.float64).reshape(m, nb))
    xb = np.ascontiguousarray(np.asarray(x_below, dtype=np.float64).reshape(k, nb))
    cc = np.ascontiguousarray(np.asarray(c, dtype=np.float64).reshape(k, nb))
    ss = np.ascontiguousarray(np.asarray(s, dtype=np.float64).reshape(k, nb))
    bb = np.ascontiguousarray(np.asarray(b, dtype=np.float64).reshape(m, nb)).copy()
    beta = np.ones(nb)
    _kernels.get_backend().update_rupdate(
        ht, rr, np.ones(nb), xb, lam, shifted, cc, ss, beta, bb, False, math.inf
    )
    return bb


def rupdate_tile(h_tile, r_right, alpha, x_below, shifts, c, s, beta, b, budget):
    """Guarded tile update; returns (delta, b_updated)."""
    ht = np.ascontiguousarray(np.asarray(h_tile, dtype=np.float64))
    m, k = ht.shape
    shifted = shifts is not None
    nb = np.asarray(c).reshape(k, -1).shape[1]
    lam = (
        np.ascontiguousarray(np.atleast_1d(np.asarray(shifts, dtype=np.float64)))
        if shifted
        else np.zeros(nb)
    )
    rr = np.ascontiguousarray(np.asarray(r_right, dtype=np.float64).reshape(m, nb))
    xb = np.ascontiguousarray(np.asarray(x_below, dtype=np.float64).reshape(k, nb))
    cc = np.ascontiguousarray(np.asarray(c, dtype=np.float64).reshape(k, nb))
    ss = np.ascontiguousarray(np.asarray(s, dtype=np.float64).reshape(k, nb))
    bb = np.ascontiguousarray(np.asarray(b, dtype=np.float64).reshape(m, nb)).copy()
    al = np.ascontiguousarray(np.atleast_1d(np.asarray(alpha, dtype=np.float64)))
    bt = np.ascontiguousarray(np.atleast_1d(np.asarray(beta, dtype=np.float64))).copy()
    _kernels.get_backend().update_rupdate(
        ht, rr, al, xb, lam, shifted, cc, ss, bt, bb, True, budget.omega
    )
    return bt, bb


def backtransform(c, s, x):
    """Apply the recorded rotations to one or more solution columns."""
    xx = np.asarray(x, dtype=np.float64)
    single = xx.ndim == 1
    n = xx.shape[0]
    xx = np.ascontiguousarray(xx.reshape(n, -1)).copy()
    cc = np.ascontiguousarray(np.asarray(c, dtype=np.float64).reshape(n, xx.shape[1]))
    ss = np.ascontiguousarray(np.asarray(s, dtype=np.float64).reshape(n, xx.shape[1]))
    _kernels.get_backend().backtransform(cc, ss, xx)
    return xx[:, 0] if single else xx


def rbacktransform(c, s, alpha, x, tile_ends, mode="eigvec", budget=None):
    """Consistency-scale, (optionally) normalize and backtransform columns.

    Returns (y, norms, alpha_cols): ``norms`` are the represented 2-norms
    before any normalization; in eigvec mode y has unit columns.
    """
    xx = np.asarray(x, dtype=np.float64)
    single = xx.ndim == 1
    n = xx.shape[0]
    xx = np.ascontiguousarray(xx.reshape(n, -1)).copy()
    nb = xx.shape[1]
    cc = np.ascontiguousarray(np.asarray(c, dtype=np.float64).reshape(n, nb))
    ss = np.ascontiguousarray(np.asarray(s, dtype=np.float64).reshape(n, nb))
    al = np.ascontiguousarray(np.asarray(alpha, dtype=np.float64).reshape(-1, nb))
    te = np.ascontiguousarray(np.asarray(tile_ends, dtype=np.int64))
    if budget is None:
        budget = OverflowBudget.for_tile_rows(max(1, n // max(1, al.shape[0])))
    norms = np.empty(nb)
    acols = np.empty(nb)
    _kernels.get_backend().rbacktransform(
        cc, ss, al, te, xx, norms, acols, _MODES[mode], budget.omega
    )
    if single:
        return xx[:, 0], norms[0], acols[0]
    return xx, norms, acols


def _prep_complex(h_tile, h_left, shifts, r_right, c_re, c_im, s, b):
    lam = np.ascontiguousarray(np.atleast_1d(np.asarray(shifts, dtype=np.complex128)))
    nb = lam.shape[0]
    rrc = np.asarray(r_right)
    rr2 = (
        interleave_complex(rrc.reshape(-1, nb))
        if np.iscomplexobj(rrc)
        else np.ascontiguousarray(np.asarray(rrc, dtype=np.float64).reshape(-1, 2 * nb))
    )
    k = rr2.shape[0]
    hdiag = np.ascontiguousarray(np.asarray(h_tile, dtype=np.float64).reshape(k, -1))
    has_left = h_left is not None
    hl = np.ascontiguousarray(np.asarray(h_left, dtype=np.float64)) if has_left else np.zeros(k)
    cc = np.ascontiguousarray(np.asarray(c_re, dtype=np.float64).reshape(k, nb))
    ci = np.ascontiguousarray(np.asarray(c_im, dtype=np.float64).reshape(k, nb))
    ss = np.ascontiguousarray(np.asarray(s, dtype=np.float64).reshape(k, nb))
    x2 = interleave_complex(np.asarray(b, dtype=np.complex128).reshape(k, nb))
    return hdiag, hl, has_left, lam, rr2, cc, ci, ss, x2, nb


def csolve_tile(h_tile, h_left, shifts, r_right, c_re, c_im, s, b):
    """Complex small substitution via the explicit complex triangular factor."""
    hdiag, hl, has_left, lam, rr2, cc, ci, ss, x2, nb = _prep_complex(
        h_tile, h_left, shifts, r_right, c_re, c_im, s, b
    )
    beta = np.ones(nb)
    status = _kernels.get_backend().csolve_crsolve(
        hdiag, hl, has_left,
        np.ascontiguousarray(lam.real), np.ascontiguousarray(lam.imag),
        rr2, cc, ci, ss, x2, beta, False, math.inf,
    )
    if status != 0:
        _raise_singular(status, 0)
    return deinterleave_complex(x2)


def crsolve_tile(h_tile, h_left, shifts, r_right, c_re, c_im, s, b, beta, budget):
    hdiag, hl, has_left, lam, rr2, cc, ci, ss, x2, nb = _prep_complex(
        h_tile, h_left, shifts, r_right, c_re, c_im, s, b
    )
    alpha = np.ascontiguousarray(np.atleast_1d(np.asarray(beta, dtype=np.float64))).copy()
    status = _kernels.get_backend().csolve_crsolve(
        hdiag, hl, has_left,
        np.ascontiguousarray(lam.real), np.ascontiguousarray(lam.imag),
        rr2, cc, ci, ss, x2, alpha, True, budget.omega,
    )
    if status != 0:
        _raise_singular(status, 0)
    return alpha, deinterleave_complex(x2)
