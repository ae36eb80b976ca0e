"""numba @njit kernels (primary backend).

Loop-level twins of the functions in ``numpy_backend``: same names, same
signatures, same per-element arithmetic (no fastmath, so no FMA
contraction).  The GEMMs go through np.dot and hence the same BLAS as the
numpy path.  All kernels release the GIL so the task scheduler gets real
parallelism.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

KIND_DEGENERATE = 1
KIND_SINGULAR = 2

_JIT = dict(cache=True, nogil=True, error_model="numpy")


def pack_status(kind, shift, row):
    return kind * (1 << 42) + (int(shift) << 21) + int(row)


def unpack_status(status):
    status = int(status)
    return status >> 42, (status >> 21) & ((1 << 21) - 1), status & ((1 << 21) - 1)


@njit(**_JIT)
def _pack(kind, shift, row):
    return kind * (1 << 42) + (shift << 21) + row


@njit(**_JIT)
def pow2floor(x):
    if x <= 0.0 or x != x:
        return 2.0 ** -1074
    if x == np.inf:
        return 1.0
    m, e = math.frexp(x)
    return math.ldexp(1.0, e - 1)


@njit(**_JIT)
def protect_update(bnorm, hnorm, xnorm, omega):
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
    if cand > 1.0:
        cand = 1.0
    xi = pow2floor(cand)
    for _ in range(200):
        if xi * bnorm + hnorm * (xi * xnorm) <= omega:
            break
        xi *= 0.5
    return xi


# ---------------------------------------------------------------------------
# Real reduction
# ---------------------------------------------------------------------------


@njit(**_JIT)
def reduce_diag(hdiag, hleft, has_left, lam, rright, c_out, s_out):
    k, b = rright.shape
    v = rright.copy()
    for kp in range(k - 1, 0, -1):
        a = hdiag[kp, kp - 1]
        for l in range(b):
            r = math.hypot(a, v[kp, l])
            if r == 0.0:
                return _pack(KIND_DEGENERATE, l, kp)
            c_out[kp, l] = v[kp, l] / r
            s_out[kp, l] = -a / r
        for i in range(kp - 1):
            hi = hdiag[i, kp - 1]
            for l in range(b):
                v[i, l] = c_out[kp, l] * hi + s_out[kp, l] * v[i, l]
        hd = hdiag[kp - 1, kp - 1]
        for l in range(b):
            v[kp - 1, l] = c_out[kp, l] * (hd - lam[l]) + s_out[kp, l] * v[kp - 1, l]
    if has_left:
        a = hleft[0]
        for l in range(b):
            r = math.hypot(a, v[0, l])
            if r == 0.0:
                return _pack(KIND_DEGENERATE, l, 0)
            c_out[0, l] = v[0, l] / r
            s_out[0, l] = -a / r
    else:
        for l in range(b):
            c_out[0, l] = 1.0
            s_out[0, l] = 0.0
    return 0


@njit(**_JIT)
def reduce_offdiag(htile, lam, c, s, rright, rleft_out):
    k, w = htile.shape
    b = rright.shape[1]
    v = rright.copy()
    for j in range(w - 1, 0, -1):
        for i in range(k):
            hi = htile[i, j]
            for l in range(b):
                v[i, l] = c[j, l] * hi + s[j, l] * v[i, l]
    for i in range(k - 1):
        hi = htile[i, 0]
        for l in range(b):
            rleft_out[i, l] = c[0, l] * hi + s[0, l] * v[i, l]
    hk = htile[k - 1, 0]
    for l in range(b):
        rleft_out[k - 1, l] = c[0, l] * (hk - lam[l]) + s[0, l] * v[k - 1, l]


# ---------------------------------------------------------------------------
# Real substitution
# ---------------------------------------------------------------------------


@njit(**_JIT)
def solve_rsolve(hdiag, hleft, has_left, lam, rright, c, s, x, beta, robust, omega):
    k, b = x.shape
    v = rright.copy()
    gamma = np.ones(b)
    for kp in range(k - 1, 0, -1):
        a = hdiag[kp, kp - 1]
        for l in range(b):
            phi = v[kp, l] * c[kp, l] - a * s[kp, l]
            if phi == 0.0:
                return _pack(KIND_SINGULAR, l, kp)
            if robust:
                aphi = abs(phi)
                ax = abs(x[kp, l])
                if aphi < 1.0 and ax > aphi * omega:
                    xi = pow2floor(aphi * omega / ax)
                    for i in range(k):
                        x[i, l] *= xi
                    gamma[l] *= xi
            x[kp, l] = x[kp, l] / phi
            if robust:
                xmax = 0.0
                vmax = 0.0
                hmax = 0.0
                for i in range(kp):
                    if abs(x[i, l]) > xmax:
                        xmax = abs(x[i, l])
                    if abs(v[i, l]) > vmax:
                        vmax = abs(v[i, l])
                    if abs(hdiag[i, kp - 1]) > hmax:
                        hmax = abs(hdiag[i, kp - 1])
                xi = protect_update(xmax, vmax + hmax + abs(lam[l]), abs(x[kp, l]), omega)
                if xi < 1.0:
                    for i in range(k):
                        x[i, l] *= xi
                    gamma[l] *= xi
            tau1 = s[kp, l] * x[kp, l]
            tau2 = c[kp, l] * x[kp, l]
            for i in range(kp - 1):
                hi = hdiag[i, kp - 1]
                x[i, l] = (x[i, l] - tau2 * v[i, l]) + tau1 * hi
                v[i, l] = c[kp, l] * hi + s[kp, l] * v[i, l]
            hd = hdiag[kp - 1, kp - 1]
            x[kp - 1, l] = (x[kp - 1, l] - tau2 * v[kp - 1, l]) + tau1 * (hd - lam[l])
            v[kp - 1, l] = c[kp, l] * (hd - lam[l]) + s[kp, l] * v[kp - 1, l]
    for l in range(b):
        v0 = v[0, l]
        if has_left:
            v0 = v0 * c[0, l] - hleft[0] * s[0, l]
        if v0 == 0.0:
            return _pack(KIND_SINGULAR, l, 0)
        if robust:
            av = abs(v0)
            ax = abs(x[0, l])
            if av < 1.0 and ax > av * omega:
                xi = pow2floor(av * omega / ax)
                for i in range(k):
                    x[i, l] *= xi
                gamma[l] *= xi
        x[0, l] = x[0, l] / v0
    for l in range(b):
        beta[l] *= gamma[l]
    return 0


@njit(**_JIT)
def update_rupdate(
    htile, rright, alpha, xbelow, lam, shift_active, c, s, beta, b_io, robust, omega
):
    m, k = htile.shape
    b = b_io.shape[1]
    delta = np.empty(b)
    fx = np.ones(b)
    if robust:
        hmax0 = 0.0
        for i in range(m):
            if abs(htile[i, 0]) > hmax0:
                hmax0 = abs(htile[i, 0])
        for l in range(b):
            g = min(alpha[l], beta[l])
            rho_raw = s[0, l] * xbelow[0, l]
            bmax = 0.0
            for i in range(m):
                if abs(b_io[i, l]) > bmax:
                    bmax = abs(b_io[i, l])
            xi = protect_update((g / beta[l]) * bmax, hmax0 + abs(lam[l]), abs(rho_raw), omega)
            d = xi * g
            delta[l] = d
            fb = d / beta[l]
            fxl = d / alpha[l]
            fx[l] = fxl
            if fb != 1.0:
                for i in range(m):
                    b_io[i, l] *= fb
            rho = rho_raw if fxl == 1.0 else fxl * rho_raw
            for i in range(m):
                b_io[i, l] += rho * htile[i, 0]
            if shift_active:
                b_io[m - 1, l] -= lam[l] * rho
    else:
        for l in range(b):
            rho = s[0, l] * xbelow[0, l]
            for i in range(m):
                b_io[i, l] += rho * htile[i, 0]
            if shift_active:
                b_io[m - 1, l] -= lam[l] * rho

    Z = xbelow.copy()
    if robust:
        for l in range(b):
            if fx[l] != 1.0:
                for i in range(k):
                    Z[i, l] *= fx[l]
    for l in range(b):
        Z[0, l] = c[0, l] * Z[0, l]
    for jp in range(1, k):
        for l in range(b):
            t1 = Z[jp - 1, l]
            t2 = Z[jp, l]
            Z[jp - 1, l] = c[jp, l] * t1 - s[jp, l] * t2
            Z[jp, l] = s[jp, l] * t1 + c[jp, l] * t2

    if robust and k > 1:
        rowsum = 0.0
        for i in range(m):
            acc = 0.0
            for j in range(1, k):
                acc += abs(htile[i, j])
            if acc > rowsum:
                rowsum = acc
        for l in range(b):
            bmax = 0.0
            for i in range(m):
                if abs(b_io[i, l]) > bmax:
                    bmax = abs(b_io[i, l])
            zmax = 0.0
            for i in range(k - 1):
                if abs(Z[i, l]) > zmax:
                    zmax = abs(Z[i, l])
            xi = protect_update(bmax, rowsum, zmax, omega)
            if xi < 1.0:
                delta[l] *= xi
                for i in range(m):
                    b_io[i, l] *= xi
                for i in range(k):
                    Z[i, l] *= xi
    if k > 1:
        hblock = np.ascontiguousarray(htile[:, 1:])
        zblock = np.ascontiguousarray(Z[: k - 1, :])
        prod = np.dot(hblock, zblock)
        for i in range(m):
            for l in range(b):
                b_io[i, l] -= prod[i, l]

    if robust:
        for l in range(b):
            rmax = 0.0
            bmax = 0.0
            for i in range(m):
                if abs(rright[i, l]) > rmax:
                    rmax = abs(rright[i, l])
                if abs(b_io[i, l]) > bmax:
                    bmax = abs(b_io[i, l])
            xi = protect_update(bmax, rmax, abs(Z[k - 1, l]), omega)
            if xi < 1.0:
                delta[l] *= xi
                for i in range(m):
                    b_io[i, l] *= xi
                Z[k - 1, l] *= xi
            zk = Z[k - 1, l]
            for i in range(m):
                b_io[i, l] -= rright[i, l] * zk
        for l in range(b):
            beta[l] = delta[l]
    else:
        for l in range(b):
            zk = Z[k - 1, l]
            for i in range(m):
                b_io[i, l] -= rright[i, l] * zk


@njit(**_JIT)
def backtransform(c, s, x):
    n, b = x.shape
    for l in range(b):
        t1 = x[0, l]
        for i in range(1, n):
            t2 = x[i, l]
            x[i - 1, l] = c[i, l] * t1 - s[i, l] * t2
            t1 = c[i, l] * t2 + s[i, l] * t1
        x[n - 1, l] = t1


@njit(**_JIT)
def rbacktransform(c, s, alpha, tile_ends, x, norms_out, alpha_out, mode, omega):
    n, b = x.shape
    N = alpha.shape[0]
    for l in range(b):
        amin = alpha[0, l]
        for t in range(1, N):
            if alpha[t, l] < amin:
                amin = alpha[t, l]
        start = 0
        for t in range(N):
            end = tile_ends[t]
            f = amin / alpha[t, l]
            if f != 1.0:
                for i in range(start, end):
                    x[i, l] *= f
            start = end
        xmax = 0.0
        for i in range(n):
            if abs(x[i, l]) > xmax:
                xmax = abs(x[i, l])
        if xmax == 0.0:
            norms_out[l] = 0.0
            alpha_out[l] = amin
            continue
        tsum = 0.0
        for i in range(n):
            q = x[i, l] / xmax
            tsum += q * q
        rt = math.sqrt(tsum)
        norms_out[l] = (xmax / amin) * rt
        alpha_out[l] = amin
        if mode == 1:
            for i in range(n):
                x[i, l] /= xmax
            for i in range(n):
                x[i, l] /= rt
        else:
            q = omega / xmax
            if rt > q:
                xi = pow2floor(q / rt)
                for i in range(n):
                    x[i, l] *= xi
                alpha_out[l] = amin * xi
        t1 = x[0, l]
        for i in range(1, n):
            t2 = x[i, l]
            x[i - 1, l] = c[i, l] * t1 - s[i, l] * t2
            t1 = c[i, l] * t2 + s[i, l] * t1
        x[n - 1, l] = t1


@njit(**_JIT)
def robust_trsv(r, x, robust, omega):
    k = x.shape[0]
    gamma = 1.0
    for j in range(k - 1, -1, -1):
        d = r[j, j]
        if d == 0.0:
            return _pack(KIND_SINGULAR, 0, j), gamma
        if robust:
            ad = abs(d)
            ax = abs(x[j])
            if ad < 1.0 and ax > ad * omega:
                xi = pow2floor(ad * omega / ax)
                for i in range(k):
                    x[i] *= xi
                gamma *= xi
        x[j] = x[j] / d
        if j > 0:
            if robust:
                rmax = 0.0
                bmax = 0.0
                for i in range(j):
                    if abs(r[i, j]) > rmax:
                        rmax = abs(r[i, j])
                    if abs(x[i]) > bmax:
                        bmax = abs(x[i])
                xi = protect_update(bmax, rmax, abs(x[j]), omega)
                if xi < 1.0:
                    for i in range(k):
                        x[i] *= xi
                    gamma *= xi
            xj = x[j]
            for i in range(j):
                x[i] -= xj * r[i, j]
    return 0, gamma


# ---------------------------------------------------------------------------
# Complex (interleaved) kernels
# ---------------------------------------------------------------------------


@njit(**_JIT)
def creduce_diag(hdiag, hleft, has_left, lam_re, lam_im, rright2, cre_out, cim_out, s_out):
    k = rright2.shape[0]
    b = lam_re.shape[0]
    v = rright2.copy()
    for kp in range(k - 1, 0, -1):
        a = hdiag[kp, kp - 1]
        for l in range(b):
            absv = math.hypot(v[kp, 2 * l], v[kp, 2 * l + 1])
            r = math.hypot(a, absv)
            if r == 0.0:
                return _pack(KIND_DEGENERATE, l, kp)
            cre_out[kp, l] = v[kp, 2 * l] / r
            cim_out[kp, l] = v[kp, 2 * l + 1] / r
            s_out[kp, l] = -a / r
        for i in range(kp - 1):
            hi = hdiag[i, kp - 1]
            for l in range(b):
                v[i, 2 * l] = cre_out[kp, l] * hi + s_out[kp, l] * v[i, 2 * l]
                v[i, 2 * l + 1] = cim_out[kp, l] * hi + s_out[kp, l] * v[i, 2 * l + 1]
        hd = hdiag[kp - 1, kp - 1]
        for l in range(b):
            tre = hd - lam_re[l]
            tim = -lam_im[l]
            cr = cre_out[kp, l]
            ci = cim_out[kp, l]
            sv = s_out[kp, l]
            v[kp - 1, 2 * l] = (cr * tre - ci * tim) + sv * v[kp - 1, 2 * l]
            v[kp - 1, 2 * l + 1] = (cr * tim + ci * tre) + sv * v[kp - 1, 2 * l + 1]
    if has_left:
        a = hleft[0]
        for l in range(b):
            absv = math.hypot(v[0, 2 * l], v[0, 2 * l + 1])
            r = math.hypot(a, absv)
            if r == 0.0:
                return _pack(KIND_DEGENERATE, l, 0)
            cre_out[0, l] = v[0, 2 * l] / r
            cim_out[0, l] = v[0, 2 * l + 1] / r
            s_out[0, l] = -a / r
    else:
        for l in range(b):
            cre_out[0, l] = 1.0
            cim_out[0, l] = 0.0
            s_out[0, l] = 0.0
    return 0


@njit(**_JIT)
def creduce_offdiag(htile, lam_re, lam_im, cre, cim, s, rright2, rleft_out2):
    k, w = htile.shape
    b = lam_re.shape[0]
    v = rright2.copy()
    for j in range(w - 1, 0, -1):
        for i in range(k):
            hi = htile[i, j]
            for l in range(b):
                v[i, 2 * l] = cre[j, l] * hi + s[j, l] * v[i, 2 * l]
                v[i, 2 * l + 1] = cim[j, l] * hi + s[j, l] * v[i, 2 * l + 1]
    for i in range(k - 1):
        hi = htile[i, 0]
        for l in range(b):
            rleft_out2[i, 2 * l] = cre[0, l] * hi + s[0, l] * v[i, 2 * l]
            rleft_out2[i, 2 * l + 1] = cim[0, l] * hi + s[0, l] * v[i, 2 * l + 1]
    hk = htile[k - 1, 0]
    for l in range(b):
        tre = hk - lam_re[l]
        tim = -lam_im[l]
        rleft_out2[k - 1, 2 * l] = (cre[0, l] * tre - cim[0, l] * tim) + s[0, l] * v[k - 1, 2 * l]
        rleft_out2[k - 1, 2 * l + 1] = (cre[0, l] * tim + cim[0, l] * tre) + s[0, l] * v[
            k - 1, 2 * l + 1
        ]


@njit(**_JIT)
def robust_trsv_complex(r, x, robust, omega):
    k = x.shape[0]
    gamma = 1.0
    for j in range(k - 1, -1, -1):
        d = r[j, j]
        if d == 0.0:
            return _pack(KIND_SINGULAR, 0, j), gamma
        if robust:
            ad = abs(d)
            ax = abs(x[j])
            if ad < 1.0 and ax > ad * omega:
                xi = pow2floor(ad * omega / ax)
                for i in range(k):
                    x[i] *= xi
                gamma *= xi
        x[j] = x[j] / d
        if j > 0:
            if robust:
                rmax = 0.0
                bmax = 0.0
                for i in range(j):
                    if abs(r[i, j]) > rmax:
                        rmax = abs(r[i, j])
                    if abs(x[i]) > bmax:
                        bmax = abs(x[i])
                xi = protect_update(bmax, rmax, abs(x[j]), omega)
                if xi < 1.0:
                    for i in range(k):
                        x[i] *= xi
                    gamma *= xi
            xj = x[j]
            for i in range(j):
                x[i] -= xj * r[i, j]
    return 0, gamma


@njit(**_JIT)
def _build_complex_r(hdiag, hleft, has_left, lam, vcol, cre, cim, s, l):
    k = vcol.shape[0]
    r = np.zeros((k, k), dtype=np.complex128)
    v = vcol.copy()
    for kp in range(k - 1, 0, -1):
        cc = complex(cre[kp, l], cim[kp, l])
        ccj = complex(cre[kp, l], -cim[kp, l])
        sv = s[kp, l]
        for i in range(kp + 1):
            t = complex(hdiag[i, kp - 1], 0.0)
            if i == kp - 1:
                t = t - lam
            r[i, kp] = ccj * v[i] - sv * t
            if i < kp:
                v[i] = cc * t + sv * v[i]
    if has_left:
        ccj0 = complex(cre[0, l], -cim[0, l])
        r[0, 0] = ccj0 * v[0] - s[0, l] * complex(hleft[0], 0.0)
    else:
        r[0, 0] = v[0]
    return r


@njit(**_JIT)
def csolve_crsolve(
    hdiag, hleft, has_left, lam_re, lam_im, rright2, cre, cim, s, x2, beta, robust, omega
):
    k = x2.shape[0]
    b = beta.shape[0]
    for l in range(b):
        lam = complex(lam_re[l], lam_im[l])
        vcol = np.empty(k, dtype=np.complex128)
        xc = np.empty(k, dtype=np.complex128)
        for i in range(k):
            vcol[i] = complex(rright2[i, 2 * l], rright2[i, 2 * l + 1])
            xc[i] = complex(x2[i, 2 * l], x2[i, 2 * l + 1])
        r = _build_complex_r(hdiag, hleft, has_left, lam, vcol, cre, cim, s, l)
        status, gamma = robust_trsv_complex(r, xc, robust, omega)
        if status != 0:
            row = status & ((1 << 21) - 1)
            return _pack(KIND_SINGULAR, l, row)
        for i in range(k):
            x2[i, 2 * l] = xc[i].real
            x2[i, 2 * l + 1] = xc[i].imag
        beta[l] *= gamma
    return 0


@njit(**_JIT)
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
    m, k = htile.shape
    b = lam_re.shape[0]
    delta = np.empty(b)
    fx = np.ones(b)
    if robust:
        hmax0 = 0.0
        for i in range(m):
            if abs(htile[i, 0]) > hmax0:
                hmax0 = abs(htile[i, 0])
        for l in range(b):
            g = min(alpha[l], beta[l])
            rr = s[0, l] * xbelow2[0, 2 * l]
            ri = s[0, l] * xbelow2[0, 2 * l + 1]
            bmax = 0.0
            for i in range(m):
                q = math.hypot(b_io2[i, 2 * l], b_io2[i, 2 * l + 1])
                if q > bmax:
                    bmax = q
            alam = math.hypot(lam_re[l], lam_im[l])
            xi = protect_update((g / beta[l]) * bmax, hmax0 + alam, math.hypot(rr, ri), omega)
            d = xi * g
            delta[l] = d
            fb = d / beta[l]
            fxl = d / alpha[l]
            fx[l] = fxl
            if fb != 1.0:
                for i in range(m):
                    b_io2[i, 2 * l] *= fb
                    b_io2[i, 2 * l + 1] *= fb
            if fxl != 1.0:
                rr = fxl * rr
                ri = fxl * ri
            for i in range(m):
                b_io2[i, 2 * l] += rr * htile[i, 0]
                b_io2[i, 2 * l + 1] += ri * htile[i, 0]
            if shift_active:
                b_io2[m - 1, 2 * l] -= lam_re[l] * rr - lam_im[l] * ri
                b_io2[m - 1, 2 * l + 1] -= lam_re[l] * ri + lam_im[l] * rr
    else:
        for l in range(b):
            rr = s[0, l] * xbelow2[0, 2 * l]
            ri = s[0, l] * xbelow2[0, 2 * l + 1]
            for i in range(m):
                b_io2[i, 2 * l] += rr * htile[i, 0]
                b_io2[i, 2 * l + 1] += ri * htile[i, 0]
            if shift_active:
                b_io2[m - 1, 2 * l] -= lam_re[l] * rr - lam_im[l] * ri
                b_io2[m - 1, 2 * l + 1] -= lam_re[l] * ri + lam_im[l] * rr

    Z = xbelow2.copy()
    if robust:
        for l in range(b):
            if fx[l] != 1.0:
                for i in range(k):
                    Z[i, 2 * l] *= fx[l]
                    Z[i, 2 * l + 1] *= fx[l]
    for l in range(b):
        z0r = Z[0, 2 * l]
        z0i = Z[0, 2 * l + 1]
        Z[0, 2 * l] = cre[0, l] * z0r + cim[0, l] * z0i
        Z[0, 2 * l + 1] = cre[0, l] * z0i - cim[0, l] * z0r
    for jp in range(1, k):
        for l in range(b):
            t1r = Z[jp - 1, 2 * l]
            t1i = Z[jp - 1, 2 * l + 1]
            t2r = Z[jp, 2 * l]
            t2i = Z[jp, 2 * l + 1]
            Z[jp - 1, 2 * l] = (cre[jp, l] * t1r - cim[jp, l] * t1i) - s[jp, l] * t2r
            Z[jp - 1, 2 * l + 1] = (cre[jp, l] * t1i + cim[jp, l] * t1r) - s[jp, l] * t2i
            Z[jp, 2 * l] = s[jp, l] * t1r + (cre[jp, l] * t2r + cim[jp, l] * t2i)
            Z[jp, 2 * l + 1] = s[jp, l] * t1i + (cre[jp, l] * t2i - cim[jp, l] * t2r)

    if robust and k > 1:
        rowsum = 0.0
        for i in range(m):
            acc = 0.0
            for j in range(1, k):
                acc += abs(htile[i, j])
            if acc > rowsum:
                rowsum = acc
        for l in range(b):
            bmax = 0.0
            for i in range(m):
                q = math.hypot(b_io2[i, 2 * l], b_io2[i, 2 * l + 1])
                if q > bmax:
                    bmax = q
            zmax = 0.0
            for i in range(k - 1):
                q = math.hypot(Z[i, 2 * l], Z[i, 2 * l + 1])
                if q > zmax:
                    zmax = q
            xi = protect_update(bmax, rowsum, zmax, omega)
            if xi < 1.0:
                delta[l] *= xi
                for i in range(m):
                    b_io2[i, 2 * l] *= xi
                    b_io2[i, 2 * l + 1] *= xi
                for i in range(k):
                    Z[i, 2 * l] *= xi
                    Z[i, 2 * l + 1] *= xi
    if k > 1:
        hblock = np.ascontiguousarray(htile[:, 1:])
        zblock = np.ascontiguousarray(Z[: k - 1, :])
        prod = np.dot(hblock, zblock)
        for i in range(m):
            for j in range(prod.shape[1]):
                b_io2[i, j] -= prod[i, j]

    if robust:
        for l in range(b):
            rmax = 0.0
            bmax = 0.0
            for i in range(m):
                q = math.hypot(rright2[i, 2 * l], rright2[i, 2 * l + 1])
                if q > rmax:
                    rmax = q
                q = math.hypot(b_io2[i, 2 * l], b_io2[i, 2 * l + 1])
                if q > bmax:
                    bmax = q
            zkr = Z[k - 1, 2 * l]
            zki = Z[k - 1, 2 * l + 1]
            xi = protect_update(bmax, rmax, math.hypot(zkr, zki), omega)
            if xi < 1.0:
                delta[l] *= xi
                for i in range(m):
                    b_io2[i, 2 * l] *= xi
                    b_io2[i, 2 * l + 1] *= xi
                zkr *= xi
                zki *= xi
            for i in range(m):
                b_io2[i, 2 * l] -= rright2[i, 2 * l] * zkr - rright2[i, 2 * l + 1] * zki
                b_io2[i, 2 * l + 1] -= rright2[i, 2 * l] * zki + rright2[i, 2 * l + 1] * zkr
        for l in range(b):
            beta[l] = delta[l]
    else:
        for l in range(b):
            zkr = Z[k - 1, 2 * l]
            zki = Z[k - 1, 2 * l + 1]
            for i in range(m):
                b_io2[i, 2 * l] -= rright2[i, 2 * l] * zkr - rright2[i, 2 * l + 1] * zki
                b_io2[i, 2 * l + 1] -= rright2[i, 2 * l] * zki + rright2[i, 2 * l + 1] * zkr


@njit(**_JIT)
def cbacktransform(cre, cim, s, x2):
    n = x2.shape[0]
    b = cre.shape[1]
    for l in range(b):
        t1r = x2[0, 2 * l]
        t1i = x2[0, 2 * l + 1]
        for i in range(1, n):
            t2r = x2[i, 2 * l]
            t2i = x2[i, 2 * l + 1]
            x2[i - 1, 2 * l] = (cre[i, l] * t1r - cim[i, l] * t1i) - s[i, l] * t2r
            x2[i - 1, 2 * l + 1] = (cre[i, l] * t1i + cim[i, l] * t1r) - s[i, l] * t2i
            nr = s[i, l] * t1r + (cre[i, l] * t2r + cim[i, l] * t2i)
            ni = s[i, l] * t1i + (cre[i, l] * t2i - cim[i, l] * t2r)
            t1r = nr
            t1i = ni
        x2[n - 1, 2 * l] = t1r
        x2[n - 1, 2 * l + 1] = t1i


@njit(**_JIT)
def crbacktransform(cre, cim, s, alpha, tile_ends, x2, norms_out, alpha_out, mode, omega):
    n = x2.shape[0]
    b = alpha.shape[1]
    N = alpha.shape[0]
    for l in range(b):
        amin = alpha[0, l]
        for t in range(1, N):
            if alpha[t, l] < amin:
                amin = alpha[t, l]
        start = 0
        for t in range(N):
            end = tile_ends[t]
            f = amin / alpha[t, l]
            if f != 1.0:
                for i in range(start, end):
                    x2[i, 2 * l] *= f
                    x2[i, 2 * l + 1] *= f
            start = end
        xmax = 0.0
        for i in range(n):
            q = math.hypot(x2[i, 2 * l], x2[i, 2 * l + 1])
            if q > xmax:
                xmax = q
        if xmax == 0.0:
            norms_out[l] = 0.0
            alpha_out[l] = amin
            continue
        tsum = 0.0
        for i in range(n):
            qr = x2[i, 2 * l] / xmax
            qi = x2[i, 2 * l + 1] / xmax
            tsum += qr * qr + qi * qi
        rt = math.sqrt(tsum)
        norms_out[l] = (xmax / amin) * rt
        alpha_out[l] = amin
        if mode == 1:
            for i in range(n):
                x2[i, 2 * l] /= xmax
                x2[i, 2 * l + 1] /= xmax
            for i in range(n):
                x2[i, 2 * l] /= rt
                x2[i, 2 * l + 1] /= rt
        else:
            q = omega / xmax
            if rt > q:
                xi = pow2floor(q / rt)
                for i in range(n):
                    x2[i, 2 * l] *= xi
                    x2[i, 2 * l + 1] *= xi
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
            t1r = nr
            t1i = ni
        x2[n - 1, 2 * l] = t1r
        x2[n - 1, 2 * l + 1] = t1i


# ---------------------------------------------------------------------------
# Single-sweep reference solver
# ---------------------------------------------------------------------------


@njit(**_JIT)
def henry_solve_real(h, lam, x):
    n = h.shape[0]
    b = lam.shape[0]
    v = np.empty((n, b))
    for i in range(n):
        for l in range(b):
            v[i, l] = h[i, n - 1]
    for l in range(b):
        v[n - 1, l] -= lam[l]
    cs_c = np.empty((n, b))
    cs_s = np.empty((n, b))
    for l in range(b):
        cs_c[0, l] = 1.0
        cs_s[0, l] = 0.0
    for kp in range(n - 1, 0, -1):
        a = h[kp, kp - 1]
        for l in range(b):
            r = math.hypot(a, v[kp, l])
            if r == 0.0:
                return _pack(KIND_DEGENERATE, l, kp)
            c = v[kp, l] / r
            s = -a / r
            cs_c[kp, l] = c
            cs_s[kp, l] = s
            phi = v[kp, l] * c - a * s
            if phi == 0.0:
                return _pack(KIND_SINGULAR, l, kp)
            x[kp, l] /= phi
            tau1 = s * x[kp, l]
            tau2 = c * x[kp, l]
            for i in range(kp - 1):
                hi = h[i, kp - 1]
                x[i, l] = (x[i, l] - tau2 * v[i, l]) + tau1 * hi
                v[i, l] = c * hi + s * v[i, l]
            hd = h[kp - 1, kp - 1]
            x[kp - 1, l] = (x[kp - 1, l] - tau2 * v[kp - 1, l]) + tau1 * (hd - lam[l])
            v[kp - 1, l] = c * (hd - lam[l]) + s * v[kp - 1, l]
    for l in range(b):
        if v[0, l] == 0.0:
            return _pack(KIND_SINGULAR, l, 0)
        x[0, l] /= v[0, l]
    backtransform(cs_c, cs_s, x)
    return 0


@njit(**_JIT)
def henry_solve_complex(h, lam, x):
    n = h.shape[0]
    b = lam.shape[0]
    v = np.empty((n, b), dtype=np.complex128)
    for i in range(n):
        for l in range(b):
            v[i, l] = complex(h[i, n - 1], 0.0)
    for l in range(b):
        v[n - 1, l] -= lam[l]
    cs_c = np.empty((n, b), dtype=np.complex128)
    cs_s = np.empty((n, b))
    for l in range(b):
        cs_c[0, l] = 1.0
        cs_s[0, l] = 0.0
    for kp in range(n - 1, 0, -1):
        a = h[kp, kp - 1]
        for l in range(b):
            r = math.hypot(a, abs(v[kp, l]))
            if r == 0.0:
                return _pack(KIND_DEGENERATE, l, kp)
            c = v[kp, l] / r
            s = -a / r
            cs_c[kp, l] = c
            cs_s[kp, l] = s
            phi = c.conjugate() * v[kp, l] - a * s
            if phi == 0.0:
                return _pack(KIND_SINGULAR, l, kp)
            x[kp, l] /= phi
            tau1 = s * x[kp, l]
            tau2 = c.conjugate() * x[kp, l]
            for i in range(kp - 1):
                hi = h[i, kp - 1]
                x[i, l] = (x[i, l] - tau2 * v[i, l]) + tau1 * hi
                v[i, l] = c * hi + s * v[i, l]
            hd = h[kp - 1, kp - 1]
            x[kp - 1, l] = (x[kp - 1, l] - tau2 * v[kp - 1, l]) + tau1 * (hd - lam[l])
            v[kp - 1, l] = c * (hd - lam[l]) + s * v[kp - 1, l]
    for l in range(b):
        if v[0, l] == 0.0:
            return _pack(KIND_SINGULAR, l, 0)
        x[0, l] /= v[0, l]
        t1 = x[0, l]
        for i in range(1, n):
            t2 = x[i, l]
            x[i - 1, l] = cs_c[i, l] * t1 - cs_s[i, l] * t2
            t1 = cs_s[i, l] * t1 + cs_c[i, l].conjugate() * t2
        x[n - 1, l] = t1
