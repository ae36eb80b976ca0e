"""Vectorized numpy kernels (fallback backend).

Every kernel here has a loop-level twin in ``numba_backend``; the two share
signatures and per-element arithmetic.  Batch dimensions are vectorized,
the sequential sweeps over tile rows/columns are not (they carry true data
dependences).

Index conventions are 0-based throughout.  A diagonal tile of height k is
passed as ``hdiag`` with shape (k, k-1): the tile's last column is replaced
by the cross-over column, so ``[hdiag | crossover]`` is upper Hessenberg.
Complex data is interleaved: column pairs (2l, 2l+1) hold re/im of shift l.

Robust kernels take ``robust``/``omega``; with ``robust=False`` the guard
logic is skipped entirely, and with ``robust=True`` and no triggered
scaling the executed arithmetic is identical, so the two paths agree
bitwise on benign data.  Scaling factors are powers of two, which makes
every rescaling multiplication exact.

The factorization sweeps (reduce kernels, the ``v`` recurrences) are not
overflow-guarded; only substitution results and linear updates are.
"""

from __future__ import annotations

import math

import numpy as np

# Status packing: 0 = ok, else kind * 2**42 + shift_index * 2**21 + row.
KIND_DEGENERATE = 1
KIND_SINGULAR = 2


def pack_status(kind, shift, row):
    return kind * (1 << 42) + (int(shift) << 21) + int(row)


def unpack_status(status):
    status = int(status)
    return status >> 42, (status >> 21) & ((1 << 21) - 1), status & ((1 << 21) - 1)


def pow2floor(x):
    """Largest power of two <= x (x > 0)."""
    if x <= 0.0 or x != x:
        return 2.0 ** -1074
    if x == math.inf:
        return 1.0
    m, e = math.frexp(x)
    return math.ldexp(1.0, e - 1)


def protect_update(bnorm, hnorm, xnorm, omega):
    """Scaling xi in (0,1] such that xi*b - H(xi*x) cannot exceed omega.

    Guarantees xi*bnorm + hnorm*(xi*xnorm) <= omega; returns 1 whenever the
    unscaled bound already holds.  xi is a power of two, so applying it is
    exact.
    """
    if xnorm <= 1.0:
        if bnorm + hnorm * xnorm <= omega:
            return 1.0
        cand = (omega * 0.5) / (bnorm * 0.5 + (hnorm * xnorm) * 0.5)
    else:
        if bnorm <= omega and hnorm <= (omega - bnorm) / xnorm:
            return 1.0
        u = bnorm / xnorm
        cand = ((omega * 0.5) / (u * 0.5 + hnorm * 0.5)) / xnorm
    if not (cand > 0.0):
        cand = 2.0 ** -1074
    xi = pow2floor(min(cand, 1.0))
    for _ in range(200):
        if xi * bnorm + hnorm * (xi * xnorm) <= omega:
            break
        xi *= 0.5
    return xi


# ---------------------------------------------------------------------------
# Real reduction kernels
# ---------------------------------------------------------------------------


def reduce_diag(hdiag, hleft, has_left, lam, rright, c_out, s_out):
    """Record the rotations triangularizing one shifted diagonal tile.

    Sweeps local columns right to left; the pair (subdiagonal entry,
    current cross-over entry) defines each rotation.  Row 0 of the output
    holds the cross-tile rotation when ``has_left``, else identity padding.
    """
    k, b = rright.shape
    v = rright.copy()
    with np.errstate(all="ignore"):
        for kp in range(k - 1, 0, -1):
            a = hdiag[kp, kp - 1]
            bv = v[kp, :]
            r = np.hypot(a, bv)
            if np.any(r == 0.0):
                l = int(np.nonzero(r == 0.0)[0][0])
                return pack_status(KIND_DEGENERATE, l, kp)
            c = bv / r
            s = -a / r
            c_out[kp, :] = c
            s_out[kp, :] = s
            hcol = hdiag[:, kp - 1]
            v[: kp - 1, :] = c[None, :] * hcol[: kp - 1, None] + s[None, :] * v[: kp - 1, :]
            v[kp - 1, :] = c * (hcol[kp - 1] - lam) + s * v[kp - 1, :]
        if has_left:
            a = hleft[0]
            bv = v[0, :]
            r = np.hypot(a, bv)
            if np.any(r == 0.0):
                l = int(np.nonzero(r == 0.0)[0][0])
                return pack_status(KIND_DEGENERATE, l, 0)
            c_out[0, :] = bv / r
            s_out[0, :] = -a / r
        else:
            c_out[0, :] = 1.0
            s_out[0, :] = 0.0
    return 0


def reduce_offdiag(htile, lam, c, s, rright, rleft_out):
    """Apply one tile column's recorded rotations to an offdiagonal tile.

    ``lam`` is all zeros for far-from-diagonal tiles (the shift only
    reaches the tile touching the diagonal).
    """
    k, w = htile.shape
    v = rright.copy()
    with np.errstate(all="ignore"):
        for j in range(w - 1, 0, -1):
            hcol = htile[:, j]
            v[:, :] = c[j, None, :] * hcol[:, None] + s[j, None, :] * v
        rleft_out[: k - 1, :] = (
            c[0, None, :] * htile[: k - 1, 0, None] + s[0, None, :] * v[: k - 1, :]
        )
        rleft_out[k - 1, :] = c[0, :] * (htile[k - 1, 0] - lam) + s[0, :] * v[k - 1, :]


# ---------------------------------------------------------------------------
# Real substitution kernels
# ---------------------------------------------------------------------------


def solve_rsolve(hdiag, hleft, has_left, lam, rright, c, s, x, beta, robust, omega):
    """Small backward substitution on one diagonal tile, optionally guarded.

    The triangular column is recomputed on the fly from the recorded
    rotations.  With ``robust`` the column of ``x`` is rescaled by powers
    of two whenever a division or linear update could exceed ``omega``;
    on exit ``beta`` carries the accumulated per-column scalings
    (alpha = gamma * beta_in).
    """
    k, b = x.shape
    v = rright.copy()
    gamma = np.ones(b)
    with np.errstate(all="ignore"):
        for kp in range(k - 1, 0, -1):
            a = hdiag[kp, kp - 1]
            hcol = hdiag[:, kp - 1]
            phi = v[kp, :] * c[kp, :] - a * s[kp, :]
            if np.any(phi == 0.0):
                l = int(np.nonzero(phi == 0.0)[0][0])
                return pack_status(KIND_SINGULAR, l, kp)
            if robust:
                aphi = np.abs(phi)
                ax = np.abs(x[kp, :])
                for l in np.nonzero((aphi < 1.0) & (ax > aphi * omega))[0]:
                    xi = pow2floor(aphi[l] * omega / ax[l])
                    x[:, l] *= xi
                    gamma[l] *= xi
            x[kp, :] /= phi
            if robust:
                xmax = np.max(np.abs(x[:kp, :]), axis=0)
                vmax = np.max(np.abs(v[:kp, :]), axis=0)
                hmax = float(np.max(np.abs(hcol[:kp])))
                for l in range(b):
                    xi = protect_update(
                        xmax[l], vmax[l] + hmax + abs(lam[l]), abs(x[kp, l]), omega
                    )
                    if xi < 1.0:
                        x[:, l] *= xi
                        gamma[l] *= xi
            tau1 = s[kp, :] * x[kp, :]
            tau2 = c[kp, :] * x[kp, :]
            x[: kp - 1, :] = (x[: kp - 1, :] - tau2 * v[: kp - 1, :]) + tau1 * hcol[
                : kp - 1, None
            ]
            x[kp - 1, :] = (x[kp - 1, :] - tau2 * v[kp - 1, :]) + tau1 * (hcol[kp - 1] - lam)
            v[: kp - 1, :] = c[kp, :] * hcol[: kp - 1, None] + s[kp, :] * v[: kp - 1, :]
            v[kp - 1, :] = c[kp, :] * (hcol[kp - 1] - lam) + s[kp, :] * v[kp - 1, :]
        v0 = v[0, :].copy()
        if has_left:
            v0 = v0 * c[0, :] - hleft[0] * s[0, :]
        if np.any(v0 == 0.0):
            l = int(np.nonzero(v0 == 0.0)[0][0])
            return pack_status(KIND_SINGULAR, l, 0)
        if robust:
            av = np.abs(v0)
            ax = np.abs(x[0, :])
            for l in np.nonzero((av < 1.0) & (ax > av * omega))[0]:
                xi = pow2floor(av[l] * omega / ax[l])
                x[:, l] *= xi
                gamma[l] *= xi
        x[0, :] /= v0
    beta *= gamma
    return 0


def update_rupdate(
    htile, rright, alpha, xbelow, lam, shift_active, c, s, beta, b_io, robust, omega
):
    """Linear tile update, optionally consistency-scaled and guarded.

    Realizes B <- B - [shifted column | shared block | crossover] applied to
    the rotated solution segment.  The shared-block product is one GEMM.
    With ``robust``, X carries scalings ``alpha`` and B carries ``beta``;
    on exit ``beta`` holds the combined scaling delta of the updated tile.
    """
    m, k = htile.shape
    b = b_io.shape[1]
    hcol0 = htile[:, 0]
    with np.errstate(all="ignore"):
        if robust:
            delta = np.empty(b)
            fx = np.empty(b)
            hmax0 = float(np.max(np.abs(hcol0)))
            for l in range(b):
                g = min(alpha[l], beta[l])
                rho_raw = s[0, l] * xbelow[0, l]
                bn = (g / beta[l]) * float(np.max(np.abs(b_io[:, l])))
                xi = protect_update(bn, hmax0 + abs(lam[l]), abs(rho_raw), omega)
                d = xi * g
                delta[l] = d
                fb = d / beta[l]
                fxl = d / alpha[l]
                fx[l] = fxl
                if fb != 1.0:
                    b_io[:, l] *= fb
                rho = rho_raw if fxl == 1.0 else fxl * rho_raw
                b_io[:, l] += rho * hcol0
                if shift_active:
                    b_io[m - 1, l] -= lam[l] * rho
            Z = xbelow.copy()
            for l in range(b):
                if fx[l] != 1.0:
                    Z[:, l] *= fx[l]
        else:
            rho_v = s[0, :] * xbelow[0, :]
            b_io += rho_v[None, :] * hcol0[:, None]
            if shift_active:
                b_io[m - 1, :] -= lam * rho_v
            Z = xbelow.copy()

        Z[0, :] *= c[0, :]
        for jp in range(1, k):
            t1 = Z[jp - 1, :].copy()
            t2 = Z[jp, :]
            Z[jp - 1, :] = c[jp, :] * t1 - s[jp, :] * t2
            Z[jp, :] = s[jp, :] * t1 + c[jp, :] * t2

        if robust and k > 1:
            rowsum = float(np.max(np.sum(np.abs(htile[:, 1:]), axis=1)))
            for l in range(b):
                bmax = float(np.max(np.abs(b_io[:, l])))
                zmax = float(np.max(np.abs(Z[: k - 1, l])))
                xi = protect_update(bmax, rowsum, zmax, omega)
                if xi < 1.0:
                    delta[l] *= xi
                    b_io[:, l] *= xi
                    Z[:, l] *= xi
        if k > 1:
            b_io -= htile[:, 1:] @ Z[: k - 1, :]

        if robust:
            for l in range(b):
                rmax = float(np.max(np.abs(rright[:, l])))
                bmax = float(np.max(np.abs(b_io[:, l])))
                xi = protect_update(bmax, rmax, abs(Z[k - 1, l]), omega)
                if xi < 1.0:
                    delta[l] *= xi
                    b_io[:, l] *= xi
                    Z[k - 1, l] *= xi
                b_io[:, l] -= rright[:, l] * Z[k - 1, l]
            beta[:] = delta
        else:
            b_io -= rright * Z[k - 1, :][None, :]


def backtransform(c, s, x):
    """Apply the recorded rotations to solution columns, ascending rows."""
    n = x.shape[0]
    t1 = x[0, :].copy()
    for i in range(1, n):
        t2 = x[i, :].copy()
        x[i - 1, :] = c[i, :] * t1 - s[i, :] * t2
        t1 = c[i, :] * t2 + s[i, :] * t1
    x[n - 1, :] = t1


def rbacktransform(c, s, alpha, tile_ends, x, norms_out, alpha_out, mode, omega):
    """Consistency scaling, norm, optional normalization, backtransform.

    mode 0 (system solve): rescale all segments to the column minimum
    scaling, guard against rotation growth, backtransform; ``alpha_out``
    is the final per-column scale.  mode 1 (eigenvector): additionally
    normalize so the output column has unit 2-norm; ``norms_out`` receives
    the represented (unscaled) norm used by the convergence test.  A zero
    column is left zero with norm 0.
    """
    n, b = x.shape
    N = alpha.shape[0]
    with np.errstate(all="ignore"):
        for l in range(b):
            amin = float(np.min(alpha[:, l]))
            start = 0
            for t in range(N):
                end = int(tile_ends[t])
                f = amin / alpha[t, l]
                if f != 1.0:
                    x[start:end, l] *= f
                start = end
            col = x[:, l]
            xmax = float(np.max(np.abs(col)))
            if xmax == 0.0:
                norms_out[l] = 0.0
                alpha_out[l] = amin
                continue
            tsum = float(np.sum((col / xmax) ** 2))
            rt = math.sqrt(tsum)
            norms_out[l] = (xmax / amin) * rt
            alpha_out[l] = amin
            if mode == 1:
                x[:, l] /= xmax
                x[:, l] /= rt
            else:
                q = omega / xmax
                if rt > q:
                    xi = pow2floor(q / rt)
                    x[:, l] *= xi
                    alpha_out[l] = amin * xi
            t1 = x[0, l]
            for i in range(1, n):
                t2 = x[i, l]
                x[i - 1, l] = c[i, l] * t1 - s[i, l] * t2
                t1 = c[i, l] * t2 + s[i, l] * t1
            x[n - 1, l] = t1


def robust_trsv(r, x, robust, omega):
    """Scaled upper-triangular solve R x = gamma b, column oriented.

    ``x`` holds b on entry and the scaled solution on exit.  gamma is a
    power of two; with no triggered scaling the operation sequence is the
    classical right-looking substitution.
    """
    k = x.shape[0]
    gamma = 1.0
    with np.errstate(all="ignore"):
        for j in range(k - 1, -1, -1):
            d = r[j, j]
            if d == 0.0:
                return pack_status(KIND_SINGULAR, 0, j), gamma
            if robust:
                ad = abs(d)
                ax = abs(x[j])
                if ad < 1.0 and ax > ad * omega:
                    xi = pow2floor(ad * omega / ax)
                    x *= xi
                    gamma *= xi
            x[j] = x[j] / d
            if j > 0:
                if robust:
                    rmax = float(np.max(np.abs(r[:j, j])))
                    bmax = float(np.max(np.abs(x[:j])))
                    xi = protect_update(bmax, rmax, abs(x[j]), omega)
                    if xi < 1.0:
                        x *= xi
                        gamma *= xi
                x[:j] -= x[j] * r[:j, j]
    return 0, gamma


# ---------------------------------------------------------------------------
# Complex (interleaved) kernels
# ---------------------------------------------------------------------------


def creduce_diag(hdiag, hleft, has_left, lam_re, lam_im, rright2, cre_out, cim_out, s_out):
    """Complex-shift variant of reduce_diag on interleaved cross-over data.

    The complex cosine keeps the sine real, so the bulk of the work is two
    real saxpy-style updates per column (one per re/im plane).
    """
    k = hdiag.shape[0] if hdiag.ndim == 2 else rright2.shape[0]
    b = lam_re.shape[0]
    vre = rright2[:, 0::2].copy()
    vim = rright2[:, 1::2].copy()
    with np.errstate(all="ignore"):
        for kp in range(k - 1, 0, -1):
            a = hdiag[kp, kp - 1]
            absv = np.hypot(vre[kp, :], vim[kp, :])
            r = np.hypot(a, absv)
            if np.any(r == 0.0):
                l = int(np.nonzero(r == 0.0)[0][0])
                return pack_status(KIND_DEGENERATE, l, kp)
            cr = vre[kp, :] / r
            ci = vim[kp, :] / r
            sv = -a / r
            cre_out[kp, :] = cr
            cim_out[kp, :] = ci
            s_out[kp, :] = sv
            hcol = hdiag[:, kp - 1]
            vre[: kp - 1, :] = cr * hcol[: kp - 1, None] + sv * vre[: kp - 1, :]
            vim[: kp - 1, :] = ci * hcol[: kp - 1, None] + sv * vim[: kp - 1, :]
            tre = hcol[kp - 1] - lam_re
            tim = -lam_im
            vre[kp - 1, :] = (cr * tre - ci * tim) + sv * vre[kp - 1, :]
            vim[kp - 1, :] = (cr * tim + ci * tre) + sv * vim[kp - 1, :]
        if has_left:
            a = hleft[0]
            absv = np.hypot(vre[0, :], vim[0, :])
            r = np.hypot(a, absv)
            if np.any(r == 0.0):
                l = int(np.nonzero(r == 0.0)[0][0])
                return pack_status(KIND_DEGENERATE, l, 0)
            cre_out[0, :] = vre[0, :] / r
            cim_out[0, :] = vim[0, :] / r
            s_out[0, :] = -a / r
        else:
            cre_out[0, :] = 1.0
            cim_out[0, :] = 0.0
            s_out[0, :] = 0.0
    return 0


def creduce_offdiag(htile, lam_re, lam_im, cre, cim, s, rright2, rleft_out2):
    k, w = htile.shape
    vre = rright2[:, 0::2].copy()
    vim = rright2[:, 1::2].copy()
    with np.errstate(all="ignore"):
        for j in range(w - 1, 0, -1):
            hcol = htile[:, j]
            vre[:, :] = cre[j, None, :] * hcol[:, None] + s[j, None, :] * vre
            vim[:, :] = cim[j, None, :] * hcol[:, None] + s[j, None, :] * vim
        rleft_out2[: k - 1, 0::2] = (
            cre[0, None, :] * htile[: k - 1, 0, None] + s[0, None, :] * vre[: k - 1, :]
        )
        rleft_out2[: k - 1, 1::2] = (
            cim[0, None, :] * htile[: k - 1, 0, None] + s[0, None, :] * vim[: k - 1, :]
        )
        tre = htile[k - 1, 0] - lam_re
        tim = -lam_im
        rleft_out2[k - 1, 0::2] = (cre[0, :] * tre - cim[0, :] * tim) + s[0, :] * vre[k - 1, :]
        rleft_out2[k - 1, 1::2] = (cre[0, :] * tim + cim[0, :] * tre) + s[0, :] * vim[k - 1, :]


def _build_complex_r(hdiag, hleft, has_left, lam, vcol, cre, cim, s, l):
    """Form the tile's complex triangular factor from the recorded rotations."""
    k = vcol.shape[0]
    r = np.zeros((k, k), dtype=np.complex128)
    v = vcol.copy()
    for kp in range(k - 1, 0, -1):
        cc = complex(cre[kp, l], cim[kp, l])
        sv = s[kp, l]
        t = hdiag[: kp + 1, kp - 1].astype(np.complex128)
        t[kp - 1] -= lam
        r[: kp + 1, kp] = cc.conjugate() * v[: kp + 1] - sv * t
        v[:kp] = cc * t[:kp] + sv * v[:kp]
    if has_left:
        cc0 = complex(cre[0, l], cim[0, l])
        r[0, 0] = cc0.conjugate() * v[0] - s[0, l] * hleft[0]
    else:
        r[0, 0] = v[0]
    return r


def robust_trsv_complex(r, x, robust, omega):
    """Complex analogue of robust_trsv; re/im are scaled alike by real gamma."""
    k = x.shape[0]
    gamma = 1.0
    with np.errstate(all="ignore"):
        for j in range(k - 1, -1, -1):
            d = r[j, j]
            if d == 0.0:
                return pack_status(KIND_SINGULAR, 0, j), gamma
            if robust:
                ad = abs(d)
                ax = abs(x[j])
                if ad < 1.0 and ax > ad * omega:
                    xi = pow2floor(ad * omega / ax)
                    x *= xi
                    gamma *= xi
            x[j] = x[j] / d
            if j > 0:
                if robust:
                    rmax = float(np.max(np.abs(r[:j, j])))
                    bmax = float(np.max(np.abs(x[:j])))
                    xi = protect_update(bmax, rmax, abs(x[j]), omega)
                    if xi < 1.0:
                        x *= xi
                        gamma *= xi
                x[:j] -= x[j] * r[:j, j]
    return 0, gamma


def csolve_crsolve(
    hdiag, hleft, has_left, lam_re, lam_im, rright2, cre, cim, s, x2, beta, robust, omega
):
    """Small complex backward substitution via the explicit triangular factor.

    The interleaved tile is converted to a true complex triangular matrix
    and solved column by column; one real scaling per complex column keeps
    re/im consistent.
    """
    k = x2.shape[0]
    b = beta.shape[0]
    with np.errstate(all="ignore"):
        for l in range(b):
            lam = complex(lam_re[l], lam_im[l])
            vcol = rright2[:, 2 * l] + 1j * rright2[:, 2 * l + 1]
            r = _build_complex_r(hdiag, hleft, has_left, lam, vcol, cre, cim, s, l)
            xc = x2[:, 2 * l] + 1j * x2[:, 2 * l + 1]
            status, gamma = robust_trsv_complex(r, xc, robust, omega)
            if status != 0:
                kind, _, row = unpack_status(status)
                return pack_status(kind, l, row)
            x2[:, 2 * l] = xc.real
            x2[:, 2 * l + 1] = xc.imag
            beta[l] *= gamma
    return 0


def cupdate_crupdate(
    htile,
    rright2,
    alpha,
    xbelow2,
    lam_re,
    lam_im,
    shift_active,
    cre,
    cim,
    s,
    beta,
    b_io2,
    robust,
    omega,
):
    """Complex linear tile update on interleaved storage.

    The shared real block times the interleaved solution block is a single
    real GEMM; only the shift column and the cross-over column need
    complex scalar emulation.
    """
    m, k = htile.shape
    b = beta.shape[0] if robust else lam_re.shape[0]
    hcol0 = htile[:, 0]
    with np.errstate(all="ignore"):
        if robust:
            delta = np.empty(b)
            fx = np.empty(b)
            hmax0 = float(np.max(np.abs(hcol0)))
            for l in range(b):
                g = min(alpha[l], beta[l])
                rr = s[0, l] * xbelow2[0, 2 * l]
                ri = s[0, l] * xbelow2[0, 2 * l + 1]
                bn = (g / beta[l]) * float(
                    np.max(np.hypot(b_io2[:, 2 * l], b_io2[:, 2 * l + 1]))
                )
                alam = math.hypot(lam_re[l], lam_im[l])
                xi = protect_update(bn, hmax0 + alam, math.hypot(rr, ri), omega)
                d = xi * g
                delta[l] = d
                fb = d / beta[l]
                fxl = d / alpha[l]
                fx[l] = fxl
                if fb != 1.0:
                    b_io2[:, 2 * l] *= fb
                    b_io2[:, 2 * l + 1] *= fb
                if fxl != 1.0:
                    rr = fxl * rr
                    ri = fxl * ri
                b_io2[:, 2 * l] += rr * hcol0
                b_io2[:, 2 * l + 1] += ri * hcol0
                if shift_active:
                    b_io2[m - 1, 2 * l] -= lam_re[l] * rr - lam_im[l] * ri
                    b_io2[m - 1, 2 * l + 1] -= lam_re[l] * ri + lam_im[l] * rr
            Z = xbelow2.copy()
            for l in range(b):
                if fx[l] != 1.0:
                    Z[:, 2 * l] *= fx[l]
                    Z[:, 2 * l + 1] *= fx[l]
        else:
            rr_v = s[0, :] * xbelow2[0, 0::2]
            ri_v = s[0, :] * xbelow2[0, 1::2]
            b_io2[:, 0::2] += rr_v[None, :] * hcol0[:, None]
            b_io2[:, 1::2] += ri_v[None, :] * hcol0[:, None]
            if shift_active:
                b_io2[m - 1, 0::2] -= lam_re * rr_v - lam_im * ri_v
                b_io2[m - 1, 1::2] -= lam_re * ri_v + lam_im * rr_v
            Z = xbelow2.copy()

        # z(0) <- conj(c(0)) * z(0)
        z0r = Z[0, 0::2].copy()
        z0i = Z[0, 1::2].copy()
        Z[0, 0::2] = cre[0, :] * z0r + cim[0, :] * z0i
        Z[0, 1::2] = cre[0, :] * z0i - cim[0, :] * z0r
        for jp in range(1, k):
            t1r = Z[jp - 1, 0::2].copy()
            t1i = Z[jp - 1, 1::2].copy()
            t2r = Z[jp, 0::2].copy()
            t2i = Z[jp, 1::2].copy()
            Z[jp - 1, 0::2] = (cre[jp, :] * t1r - cim[jp, :] * t1i) - s[jp, :] * t2r
            Z[jp - 1, 1::2] = (cre[jp, :] * t1i + cim[jp, :] * t1r) - s[jp, :] * t2i
            Z[jp, 0::2] = s[jp, :] * t1r + (cre[jp, :] * t2r + cim[jp, :] * t2i)
            Z[jp, 1::2] = s[jp, :] * t1i + (cre[jp, :] * t2i - cim[jp, :] * t2r)

        if robust and k > 1:
            rowsum = float(np.max(np.sum(np.abs(htile[:, 1:]), axis=1)))
            for l in range(b):
                bmax = float(np.max(np.hypot(b_io2[:, 2 * l], b_io2[:, 2 * l + 1])))
                zmax = float(
                    np.max(np.hypot(Z[: k - 1, 2 * l], Z[: k - 1, 2 * l + 1]))
                )
                xi = protect_update(bmax, rowsum, zmax, omega)
                if xi < 1.0:
                    delta[l] *= xi
                    b_io2[:, 2 * l] *= xi
                    b_io2[:, 2 * l + 1] *= xi
                    Z[:, 2 * l] *= xi
                    Z[:, 2 * l + 1] *= xi
        if k > 1:
            b_io2 -= htile[:, 1:] @ Z[: k - 1, :]

        if robust:
            for l in range(b):
                rmax = float(np.max(np.hypot(rright2[:, 2 * l], rright2[:, 2 * l + 1])))
                bmax = float(np.max(np.hypot(b_io2[:, 2 * l], b_io2[:, 2 * l + 1])))
                zkr = Z[k - 1, 2 * l]
                zki = Z[k - 1, 2 * l + 1]
                xi = protect_update(bmax, rmax, math.hypot(zkr, zki), omega)
                if xi < 1.0:
                    delta[l] *= xi
                    b_io2[:, 2 * l] *= xi
                    b_io2[:, 2 * l + 1] *= xi
                    zkr *= xi
                    zki *= xi
                b_io2[:, 2 * l] -= rright2[:, 2 * l] * zkr - rright2[:, 2 * l + 1] * zki
                b_io2[:, 2 * l + 1] -= rright2[:, 2 * l] * zki + rright2[:, 2 * l + 1] * zkr
            beta[:] = delta
        else:
            zkr_v = Z[k - 1, 0::2]
            zki_v = Z[k - 1, 1::2]
            b_io2[:, 0::2] -= rright2[:, 0::2] * zkr_v[None, :] - rright2[:, 1::2] * zki_v[None, :]
            b_io2[:, 1::2] -= rright2[:, 0::2] * zki_v[None, :] + rright2[:, 1::2] * zkr_v[None, :]


def cbacktransform(cre, cim, s, x2):
    n = x2.shape[0]
    t1r = x2[0, 0::2].copy()
    t1i = x2[0, 1::2].copy()
    for i in range(1, n):
        t2r = x2[i, 0::2].copy()
        t2i = x2[i, 1::2].copy()
        x2[i - 1, 0::2] = (cre[i, :] * t1r - cim[i, :] * t1i) - s[i, :] * t2r
        x2[i - 1, 1::2] = (cre[i, :] * t1i + cim[i, :] * t1r) - s[i, :] * t2i
        nr = s[i, :] * t1r + (cre[i, :] * t2r + cim[i, :] * t2i)
        ni = s[i, :] * t1i + (cre[i, :] * t2i - cim[i, :] * t2r)
        t1r, t1i = nr, ni
    x2[n - 1, 0::2] = t1r
    x2[n - 1, 1::2] = t1i


def crbacktransform(cre, cim, s, alpha, tile_ends, x2, norms_out, alpha_out, mode, omega):
    n = x2.shape[0]
    b = alpha.shape[1]
    N = alpha.shape[0]
    with np.errstate(all="ignore"):
        for l in range(b):
            amin = float(np.min(alpha[:, l]))
            start = 0
            for t in range(N):
                end = int(tile_ends[t])
                f = amin / alpha[t, l]
                if f != 1.0:
                    x2[start:end, 2 * l] *= f
                    x2[start:end, 2 * l + 1] *= f
                start = end
            mod = np.hypot(x2[:, 2 * l], x2[:, 2 * l + 1])
            xmax = float(np.max(mod))
            if xmax == 0.0:
                norms_out[l] = 0.0
                alpha_out[l] = amin
                continue
            tsum = float(np.sum((mod / xmax) ** 2))
            rt = math.sqrt(tsum)
            norms_out[l] = (xmax / amin) * rt
            alpha_out[l] = amin
            if mode == 1:
                x2[:, 2 * l] /= xmax
                x2[:, 2 * l + 1] /= xmax
                x2[:, 2 * l] /= rt
                x2[:, 2 * l + 1] /= rt
            else:
                q = omega / xmax
                if rt > q:
                    xi = pow2floor(q / rt)
                    x2[:, 2 * l] *= xi
                    x2[:, 2 * l + 1] *= xi
                    alpha_out[l] = amin * xi
            t1r = x2[0, 2 * l]
            t1i = x2[0, 2 * l + 1]
            for i in range(1, n):
                t2r = x2[i, 2 * l]
                t2i = x2[i, 2 * l + 1]
                x2[i - 1, 2 * l] = (cre[i, l] * t1r - cim[i, l] * t1i) - s[i, l] * t2r
                x2[i - 1, 2 * l + 1] = (cre[i, l] * t1i + cim[i, l] * t1r) - s[i, l] * t2i
                nr = s[i, l] * t1r + (cre[i, l] * t2r + cim[i, l] * t2i)
                ni = s[i, l] * t1i + (cre[i, l] * t2i - cim[i, l] * t2r)
                t1r, t1i = nr, ni
            x2[n - 1, 2 * l] = t1r
            x2[n - 1, 2 * l + 1] = t1i


# ---------------------------------------------------------------------------
# Single-sweep reference solver (merged factor + substitution + backtransform)
# ---------------------------------------------------------------------------


def henry_solve_real(h, lam, x):
    """Per-shift single-sweep RQ solve; H read-only, batched over shifts."""
    n = h.shape[0]
    b = lam.shape[0]
    v = np.repeat(h[:, n - 1 : n], b, axis=1)
    v[n - 1, :] -= lam
    cs_c = np.empty((n, b))
    cs_s = np.empty((n, b))
    cs_c[0, :] = 1.0
    cs_s[0, :] = 0.0
    with np.errstate(all="ignore"):
        for kp in range(n - 1, 0, -1):
            a = h[kp, kp - 1]
            r = np.hypot(a, v[kp, :])
            if np.any(r == 0.0):
                l = int(np.nonzero(r == 0.0)[0][0])
                return pack_status(KIND_DEGENERATE, l, kp)
            c = v[kp, :] / r
            s = -a / r
            cs_c[kp, :] = c
            cs_s[kp, :] = s
            phi = v[kp, :] * c - a * s
            if np.any(phi == 0.0):
                l = int(np.nonzero(phi == 0.0)[0][0])
                return pack_status(KIND_SINGULAR, l, kp)
            x[kp, :] /= phi
            tau1 = s * x[kp, :]
            tau2 = c * x[kp, :]
            hcol = h[:, kp - 1]
            x[: kp - 1, :] = (x[: kp - 1, :] - tau2 * v[: kp - 1, :]) + tau1 * hcol[
                : kp - 1, None
            ]
            x[kp - 1, :] = (x[kp - 1, :] - tau2 * v[kp - 1, :]) + tau1 * (hcol[kp - 1] - lam)
            v[: kp - 1, :] = c * hcol[: kp - 1, None] + s * v[: kp - 1, :]
            v[kp - 1, :] = c * (hcol[kp - 1] - lam) + s * v[kp - 1, :]
        if np.any(v[0, :] == 0.0):
            l = int(np.nonzero(v[0, :] == 0.0)[0][0])
            return pack_status(KIND_SINGULAR, l, 0)
        x[0, :] /= v[0, :]
        backtransform(cs_c, cs_s, x)
    return 0


def henry_solve_complex(h, lam, x):
    """Full complex arithmetic variant of henry_solve_real (x complex)."""
    n = h.shape[0]
    b = lam.shape[0]
    v = np.repeat(h[:, n - 1 : n].astype(np.complex128), b, axis=1)
    v[n - 1, :] -= lam
    cs_c = np.empty((n, b), dtype=np.complex128)
    cs_s = np.empty((n, b))
    cs_c[0, :] = 1.0
    cs_s[0, :] = 0.0
    with np.errstate(all="ignore"):
        for kp in range(n - 1, 0, -1):
            a = h[kp, kp - 1]
            r = np.hypot(a, np.abs(v[kp, :]))
            if np.any(r == 0.0):
                l = int(np.nonzero(r == 0.0)[0][0])
                return pack_status(KIND_DEGENERATE, l, kp)
            c = v[kp, :] / r
            s = -a / r
            cs_c[kp, :] = c
            cs_s[kp, :] = s
            phi = np.conj(c) * v[kp, :] - a * s
            if np.any(phi == 0.0):
                l = int(np.nonzero(phi == 0.0)[0][0])
                return pack_status(KIND_SINGULAR, l, kp)
            x[kp, :] /= phi
            tau1 = s * x[kp, :]
            tau2 = np.conj(c) * x[kp, :]
            hcol = h[:, kp - 1]
            x[: kp - 1, :] = (x[: kp - 1, :] - tau2 * v[: kp - 1, :]) + tau1 * hcol[
                : kp - 1, None
            ]
            x[kp - 1, :] = (x[kp - 1, :] - tau2 * v[kp - 1, :]) + tau1 * (hcol[kp - 1] - lam)
            v[: kp - 1, :] = c * hcol[: kp - 1, None] + s * v[: kp - 1, :]
            v[kp - 1, :] = c * (hcol[kp - 1] - lam) + s * v[kp - 1, :]
        if np.any(v[0, :] == 0.0):
            l = int(np.nonzero(v[0, :] == 0.0)[0][0])
            return pack_status(KIND_SINGULAR, l, 0)
        x[0, :] /= v[0, :]
        t1 = x[0, :].copy()
        for i in range(1, n):
            t2 = x[i, :].copy()
            x[i - 1, :] = cs_c[i, :] * t1 - cs_s[i, :] * t2
            t1 = cs_s[i, :] * t1 + np.conj(cs_c[i, :]) * t2
        x[n - 1, :] = t1
    return 0
