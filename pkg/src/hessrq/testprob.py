"""Constructive test matrices with controlled spectra and growth behavior,
plus the Householder reduction to Hessenberg form they rely on.

The random bits come from a splitmix64 stream so generated fixtures are
reproducible from the seed alone.
"""

from __future__ import annotations

import numpy as np

from .core import ConfigError, HessenbergMatrix

__all__ = [
    "splitmix64",
    "uniform_open_closed",
    "gen_h1",
    "gen_h2",
    "gen_h3",
    "householder_hessenberg",
]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def splitmix64(seed, count):
    """``count`` outputs of the splitmix64 stream seeded with ``seed``."""
    idx = np.arange(1, count + 1, dtype=np.uint64)
    z = np.uint64(int(seed) % (1 << 64)) + idx * _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def uniform_open_closed(seed, count):
    """Uniform draws in (0, 1]."""
    bits = splitmix64(seed, count)
    return ((bits >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0 ** -53


def _unit_direction(seed, n):
    # smooth symmetric direction without libm transcendentals: sum of two
    # uniforms, centered
    u = uniform_open_closed(seed, 2 * n)
    v = (u[:n] + u[n:]) - 1.0
    nrm = float(np.linalg.norm(v))
    if nrm == 0.0:
        v = np.ones(n)
        nrm = float(np.linalg.norm(v))
    return v / nrm


def gen_h1(n, complex_fraction=0.0, seed=0):
    """Hessenberg matrix with known well-separated eigenvalues.

    A quasi-triangular matrix places eigenvalue k as a 1x1 block (value k)
    or a 2x2 block [[k, k], [-k, k]] (eigenvalues k +- ik); the remaining
    upper entries are uniform in (0, 1].  A random Householder similarity
    makes it dense, and the Householder reduction brings it back to an
    unreduced Hessenberg matrix.  Returns (H, eigenvalues): the exact block
    eigenvalues in diagonal order, conjugate pairs adjacent.
    """
    if not (0.0 <= complex_fraction <= 1.0):
        raise ConfigError(f"complex_fraction must be in [0,1], got {complex_fraction}")
    n_cplx = int(round(n * complex_fraction))
    n_cplx -= n_cplx % 2
    if complex_fraction == 1.0 and n_cplx != n:
        raise ConfigError("complex_fraction=1 requires even n")
    n_real = n - n_cplx

    for salt in range(16):
        t = np.zeros((n, n))
        eigs = np.empty(n, dtype=np.complex128)
        pos = 0
        while pos < n_real:
            k = pos + 1
            t[pos, pos] = k
            eigs[pos] = k
            pos += 1
        while pos < n:
            k = pos + 1
            t[pos, pos] = k
            t[pos, pos + 1] = k
            t[pos + 1, pos] = -k
            t[pos + 1, pos + 1] = k
            eigs[pos] = complex(k, k)
            eigs[pos + 1] = complex(k, -k)
            pos += 2

        # fill the strict upper triangle outside the diagonal blocks
        block_super = np.zeros(n, dtype=bool)
        for p in range(n_real, n - 1, 2):
            block_super[p] = True
        u = uniform_open_closed(int(seed) + salt * 0x51ED2701, n * n)
        fill = u.reshape(n, n)
        for i in range(n):
            start = i + 2 if block_super[i] else i + 1
            if start < n:
                t[i, start:] = fill[i, start:]

        v = _unit_direction(int(seed) + salt * 0xA511E9 + 1, n)
        q0 = np.eye(n) - 2.0 * np.outer(v, v)
        a = q0 @ t @ q0
        hess, _q = householder_hessenberg(a)
        hm = HessenbergMatrix(hess)
        if hm.is_unreduced():
            return hm, eigs
    raise ConfigError("could not generate an unreduced instance from this seed")


def _q2(n):
    q = np.zeros((n, n))
    for i in range(1, n):
        q[i, i - 1] = -1.0
    q[0, n - 1] = -1.0
    return q


def gen_h2(n, gamma=2.0):
    """Growth-provoking Hessenberg matrix R2 Q2 + gamma I.

    Backward substitution with the triangular factor of H2 - gamma I grows
    the solution by roughly 4**n, so solves with scaled-up right-hand sides
    exercise the numerical-scaling machinery.
    """
    if n < 2:
        raise ConfigError("n >= 2 required")
    r2 = np.triu(np.full((n, n), -float(n)), 1)
    r2[np.diag_indices(n)] = np.arange(n, 0, -1, dtype=np.float64)
    h = r2 @ _q2(n)
    h[np.diag_indices(n)] += gamma
    return HessenbergMatrix(h)


def gen_h3(n, gamma=2.0):
    """Benign Hessenberg matrix R3 Q2 + gamma I (solves never need scaling)."""
    if n < 2:
        raise ConfigError("n >= 2 required")
    r3 = np.triu(np.full((n, n), 0.5), 1)
    r3[np.diag_indices(n)] = np.arange(n, 0, -1, dtype=np.float64)
    h = r3 @ _q2(n)
    h[np.diag_indices(n)] += gamma
    return HessenbergMatrix(h)


def householder_hessenberg(a):
    """Reduce a dense square matrix to upper Hessenberg form.

    Returns (H, Q) with Q orthogonal and Q.T @ A @ Q = H.  Columns whose
    below-subdiagonal part is already zero are skipped, so an input that is
    already Hessenberg comes back unchanged with Q = I.
    """
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise ConfigError(f"expected square matrix, got {a.shape}")
    q = np.eye(n)
    for j in range(n - 2):
        x = a[j + 1 :, j]
        tail = float(np.dot(x[1:], x[1:]))
        if tail == 0.0:
            continue
        nrm = float(np.hypot(x[0], np.sqrt(tail)))
        alpha = -nrm if x[0] >= 0.0 else nrm
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        # two-sided application of P = I - 2 v v^T embedded at rows j+1:
        a[j + 1 :, j:] -= 2.0 * np.outer(v, v @ a[j + 1 :, j:])
        a[:, j + 1 :] -= 2.0 * np.outer(a[:, j + 1 :] @ v, v)
        q[:, j + 1 :] -= 2.0 * np.outer(q[:, j + 1 :] @ v, v)
        a[j + 1, j] = alpha
        a[j + 2 :, j] = 0.0
    return a, q
