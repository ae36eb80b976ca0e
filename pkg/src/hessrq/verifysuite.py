"""Self-contained property checks behind the ``verify`` CLI command.

Each check returns (name, passed, detail).  The suite runs at small sizes
so a fresh checkout can gate a release in seconds; ``quick`` trims it
further.  ``corrupt_givens`` is a test hook that flips one recorded sine
before the factorization identity is checked, to prove the suite catches
a broken rotation convention.
"""

from __future__ import annotations

import numpy as np

from .backsolve import chsrq3, dhsrq3
from .core import HessenbergMatrix, ShiftBatch, TileGrid
from .reduce import tiled_reduce
from .reference import dense_solve_oracle, henry_rq_solve
from .testprob import gen_h1, gen_h2, gen_h3

_EPS = float(np.finfo(np.float64).eps)


def random_unreduced(n, seed, sub_lo=0.5, sub_hi=1.5):
    """Seeded random unreduced Hessenberg matrix with O(1) entries."""
    rng = np.random.default_rng(seed)
    a = np.triu(rng.standard_normal((n, n)))
    for i in range(1, n):
        a[i, i - 1] = rng.uniform(sub_lo, sub_hi) * (1 if rng.uniform() < 0.5 else -1)
    return HessenbergMatrix(a)


def accumulate_q(table, col):
    """Explicitly accumulate P = G_n^T ... G_2^T for one shift column.

    Real tables give an orthogonal P; complex tables a unitary one.  The
    factorization identity is (H - lam I) @ P upper triangular, and the
    backtransform maps y to P @ y.
    """
    n = table.c_re.shape[0]
    cplx = table.is_complex
    p = np.eye(n, dtype=np.complex128 if cplx else np.float64)
    for j in range(1, n):
        r1 = p[j - 1, :].copy()
        r2 = p[j, :].copy()
        if cplx:
            c = complex(table.c_re[j, col], table.c_im[j, col])
            s = table.s[j, col]
            p[j - 1, :] = c * r1 - s * r2
            p[j, :] = s * r1 + c.conjugate() * r2
        else:
            c = table.c_re[j, col]
            s = table.s[j, col]
            p[j - 1, :] = c * r1 - s * r2
            p[j, :] = s * r1 + c * r2
    return p


def _check_rq_identity(cplx, corrupt=False):
    worst_orth = 0.0
    worst_sub = 0.0
    for n, b_r, seed in ((8, 3, 1), (17, 4, 2), (32, 8, 3)):
        h = random_unreduced(n, seed)
        if cplx:
            shifts = np.array([0.4 + 0.9j, -1.2 + 0.3j])
        else:
            shifts = np.array([0.7, -1.1])
        grid = TileGrid(n, b_r)
        sb = ShiftBatch(shifts, b_c=2)
        table, _cross = tiled_reduce(h, grid, sb)
        if corrupt:
            table.s[n // 2, 0] = -table.s[n // 2, 0]
        for l in range(sb.m):
            p = accumulate_q(table, l)
            orth = np.max(np.abs(p.conj().T @ p - np.eye(n)))
            r = (h.data - shifts[l] * np.eye(n)) @ p
            sub = np.max(np.abs(np.tril(r, -1)))
            worst_orth = max(worst_orth, orth)
            worst_sub = max(worst_sub, sub / h.infinity_norm())
    ok = worst_orth <= 50 * 32 * _EPS and worst_sub <= 50 * 32 * _EPS
    return ok, f"orthogonality {worst_orth:.2e}, subdiagonal {worst_sub:.2e}"


def _check_oracle(quick):
    cases = [(8, 2, 11), (16, 4, 12)] if quick else [(8, 2, 11), (16, 4, 12), (32, 8, 13), (24, 24, 14)]
    worst = 0.0
    for n, b_r, seed in cases:
        h = random_unreduced(n, seed)
        rng = np.random.default_rng(seed)
        nrm = h.infinity_norm()
        lam = np.array([1.5 * nrm, -1.3 * nrm, 2.0 * nrm])
        b = rng.standard_normal((n, lam.size))
        res = dhsrq3(h, lam, b, b_r=b_r, b_c=2)
        for l in range(lam.size):
            xo = dense_solve_oracle(h.data - lam[l] * np.eye(n), b[:, l])
            err = np.linalg.norm(res.x[:, l] / res.alpha[l] - xo) / np.linalg.norm(xo)
            worst = max(worst, err)
        clam = nrm * np.array([1.4 + 0.8j, -1.1 + 1.2j])
        cb = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
        cres = chsrq3(h, clam, cb, b_r=b_r, b_c=2)
        for l in range(2):
            xo = dense_solve_oracle(h.data - clam[l] * np.eye(n), cb[:, l])
            err = np.linalg.norm(cres.x[:, l] / cres.alpha[l] - xo) / np.linalg.norm(xo)
            worst = max(worst, err)
    return worst <= 1e-10, f"worst relative error {worst:.2e}"


def _check_scaling():
    n = 60
    b = np.ones((n, 1))
    good = dhsrq3(gen_h3(n), [2.0], b, b_r=16, b_c=1)
    ok_good = good.segment_scales.all_ones()
    rho = 1e290
    bad_r = dhsrq3(gen_h2(n), [2.0], rho * b, b_r=16, b_c=1, robust=True)
    ok_bad = (
        np.all(np.isfinite(bad_r.x))
        and bool(np.any(bad_r.segment_scales.alpha < 1.0))
    )
    bad_n = dhsrq3(gen_h2(n), [2.0], rho * b, b_r=16, b_c=1, robust=False)
    ok_detect = not np.all(np.isfinite(bad_n.x))
    ok = ok_good and ok_bad and ok_detect
    return ok, (
        f"good all-ones {ok_good}, bad scaled+finite {ok_bad}, "
        f"unguarded non-finite {ok_detect}"
    )


def _check_robust_equals_nonrobust():
    h = random_unreduced(24, 21)
    rng = np.random.default_rng(21)
    lam = h.infinity_norm() * np.array([1.5, -1.25, 1.75, 2.5])
    b = rng.standard_normal((24, 4))
    r1 = dhsrq3(h, lam, b, b_r=6, b_c=2, robust=True)
    r0 = dhsrq3(h, lam, b, b_r=6, b_c=2, robust=False)
    ok = np.array_equal(r1.x, r0.x) and r1.segment_scales.all_ones()
    return ok, "bitwise equal on benign input" if ok else "mismatch"


def _check_conjugacy():
    h, eigs = gen_h1(16, 1.0, seed=4)
    from .inviter import InviterConfig, chsrq3in

    sel = eigs[eigs.imag > 0]
    cfg = InviterConfig(b_r=4, b_c=4)
    a = chsrq3in(h, sel, cfg)
    bb = chsrq3in(h, sel.conj(), cfg)
    ok = np.array_equal(bb.vectors, a.vectors.conj()) and a.converged.all()
    return ok, "conjugate vectors exact" if ok else "conjugacy violated"


def _check_tiling_invariance():
    n = 24
    h = random_unreduced(n, 31)
    rng = np.random.default_rng(31)
    lam = h.infinity_norm() * np.array([1.5, -1.7])
    b = rng.standard_normal((n, 2))
    sols = []
    for b_r, b_c in ((2, 1), (5, 2), (8, 2), (n, 2)):
        sols.append(dhsrq3(h, lam, b, b_r=b_r, b_c=b_c).x)
    worst = max(
        float(np.max(np.abs(s - sols[0])) / np.max(np.abs(sols[0]))) for s in sols[1:]
    )
    return worst <= 50 * n * _EPS, f"max cross-tiling deviation {worst:.2e}"


def _check_henry_agreement():
    h = random_unreduced(20, 41)
    rng = np.random.default_rng(41)
    lam = 1.6 * h.infinity_norm()
    b = rng.standard_normal(20)
    xt = dhsrq3(h, [lam], b.reshape(-1, 1), b_r=5, b_c=1).x[:, 0]
    xh = henry_rq_solve(h, lam, b)
    err = np.linalg.norm(xt - xh) / np.linalg.norm(xh)
    return err <= 1e-12, f"tiled vs single-sweep relative gap {err:.2e}"


def run_verify(quick=False, corrupt_givens=False):
    """Run the suite; returns (passed, report_dict)."""
    checks = [
        ("rq_identity_real", lambda: _check_rq_identity(False, corrupt=corrupt_givens)),
        ("rq_identity_complex", lambda: _check_rq_identity(True)),
        ("oracle_equivalence", lambda: _check_oracle(quick)),
        ("robust_equals_nonrobust", _check_robust_equals_nonrobust),
        ("scaling_invariants", _check_scaling),
        ("conjugate_symmetry", _check_conjugacy),
    ]
    if not quick:
        checks += [
            ("tiling_invariance", _check_tiling_invariance),
            ("single_sweep_agreement", _check_henry_agreement),
        ]
    results = []
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"exception: {exc!r}"
        results.append({"name": name, "passed": bool(ok), "detail": detail})
    passed = all(r["passed"] for r in results)
    return passed, {"passed": passed, "checks": results}
