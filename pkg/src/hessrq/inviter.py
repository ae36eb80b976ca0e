"""Inverse-iteration eigenvector drivers.

One robust solve per starting vector (a single iteration, LAPACK style);
columns failing the quick norm-based convergence test are retried with new
starting vectors orthogonal to the previous choices, up to a restart cap,
and zero-filled if they never converge.  The mixed real/complex driver
processes eigenvalues in groups sized to a workspace cap and reuses one
workspace allocation across groups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    ConfigError,
    ShiftBatch,
    TileGrid,
    Workspace,
    as_hessenberg,
)
from .backsolve import robust_tiled_solve
from .overflow import OverflowBudget
from .reduce import tiled_reduce
from .testprob import uniform_open_closed

__all__ = [
    "InviterConfig",
    "EigvecResult",
    "starting_vector",
    "converged",
    "dhsrq3in",
    "chsrq3in",
    "hsrq3in",
]

_EPS = float(np.finfo(np.float64).eps)


@dataclass
class InviterConfig:
    w_max: int | None = None  # cross-over workspace cap, in reals
    b_r: int | None = None
    b_c: int = 32
    max_restarts: int = 3
    workers: int = 1
    restart_seed: int = 0x5EED


@dataclass
class EigvecResult:
    vectors: np.ndarray
    converged: np.ndarray
    restarts: np.ndarray
    norms: np.ndarray
    eigenvalues: np.ndarray


def starting_vector(h):
    """eps * ||H||_inf times the all-ones vector."""
    h = as_hessenberg(h)
    nrm = h.infinity_norm()
    if nrm == 0.0:
        raise ConfigError("zero matrix has no meaningful eigenproblem")
    return (_EPS * nrm) * np.ones(h.n)


def converged(x_norm2, n):
    """Quick convergence test on the represented iterate norm."""
    return bool(x_norm2 > 0.1 / math.sqrt(n))


def _next_start(rho, n, previous, seed, attempt):
    """Sign-pattern starting vector orthogonalized against previous choices."""
    for salt in range(64):
        bits = uniform_open_closed(seed + attempt * 0x9E37 + salt * 0x85EB, n)
        v = np.where(bits > 0.5, 1.0, -1.0)
        for p in previous:
            denom = float(np.dot(p, p))
            if denom > 0.0:
                v = v - (float(np.dot(v, p)) / denom) * p
        nrm = float(np.linalg.norm(v))
        if nrm > 1e-3 * math.sqrt(n):
            return rho * math.sqrt(n) / nrm * v
    raise ConfigError("failed to construct a new starting vector")


def _solve_group(h, grid, eigs, b, config, workspace, cplx):
    sb = ShiftBatch(eigs, b_c=config.b_c, kind="complex" if cplx else "real")
    table, cross = tiled_reduce(
        h, grid, sb, workers=config.workers, workspace=workspace
    )
    return robust_tiled_solve(
        h,
        grid,
        sb,
        table,
        cross,
        b,
        mode="eigvec",
        workers=config.workers,
        budget=OverflowBudget.for_grid(grid),
    )


def _iterate(h, eigs, config, workspace, cplx):
    h = as_hessenberg(h)
    if not h.is_unreduced():
        raise ConfigError("inverse iteration requires an unreduced Hessenberg matrix")
    n = h.n
    m = len(eigs)
    b_r = config.b_r if config.b_r is not None else min(128, n)
    grid = TileGrid(n, b_r)
    rho = _EPS * h.infinity_norm()
    if rho == 0.0:
        raise ConfigError("zero matrix has no meaningful eigenproblem")

    dtype = np.complex128 if cplx else np.float64
    out = np.zeros((n, m), dtype=dtype)
    conv = np.zeros(m, dtype=bool)
    restarts = np.zeros(m, dtype=np.int64)
    norms = np.zeros(m)

    start = rho * np.ones(n)
    previous = [start.copy()]
    remaining = np.arange(m)
    for attempt in range(config.max_restarts + 1):
        if remaining.size == 0:
            break
        bmat = np.repeat(start[:, None], remaining.size, axis=1).astype(dtype)
        res = _solve_group(h, grid, np.asarray(eigs)[remaining], bmat, config, workspace, cplx)
        ok = np.array([converged(res.norms[i], n) for i in range(remaining.size)])
        for i, orig in enumerate(remaining):
            restarts[orig] = attempt
            if ok[i]:
                out[:, orig] = res.x[:, i]
                conv[orig] = True
                norms[orig] = res.norms[i]
        remaining = remaining[~ok]
        if remaining.size and attempt < config.max_restarts:
            start = _next_start(rho, n, previous, config.restart_seed, attempt + 1)
            previous.append(start.copy())
    return EigvecResult(
        vectors=out,
        converged=conv,
        restarts=restarts,
        norms=norms,
        eigenvalues=np.asarray(eigs).copy(),
    )


def dhsrq3in(h, eigenvalues, config=None, workspace=None):
    """Eigenvectors for real eigenvalue approximations, in input order."""
    config = config or InviterConfig()
    eigs = np.asarray(eigenvalues, dtype=np.float64).ravel()
    if eigs.size == 0:
        raise ConfigError("empty eigenvalue selection")
    return _iterate(h, eigs, config, workspace, cplx=False)


def chsrq3in(h, eigenvalues, config=None, workspace=None):
    """Eigenvectors for complex eigenvalues (one per conjugate pair solved).

    Inputs with negative imaginary part are answered by conjugating the
    vector computed for their conjugate, which keeps conjugate symmetry
    exact.
    """
    config = config or InviterConfig()
    eigs = np.asarray(eigenvalues, dtype=np.complex128).ravel()
    if eigs.size == 0:
        raise ConfigError("empty eigenvalue selection")
    if np.any(eigs.imag == 0.0):
        raise ConfigError("chsrq3in requires nonzero imaginary parts")
    flip = eigs.imag < 0.0
    canon = np.where(flip, eigs.conj(), eigs)
    res = _iterate(h, canon, config, workspace, cplx=True)
    if np.any(flip):
        res.vectors[:, flip] = res.vectors[:, flip].conj()
        res.eigenvalues = eigs.copy()
    return res


def hsrq3in(h, eigenvalues, config=None):
    """Mixed real/complex driver with grouped workspace reuse.

    Stable-sorts the selection real-first, processes real eigenvalues in
    groups of 2g and complex ones in groups of g (g from the workspace
    cap), then restores the caller's ordering.  Complex entries carry one
    member per conjugate pair; the conjugate eigenvector is available by
    conjugation.
    """
    config = config or InviterConfig()
    h = as_hessenberg(h)
    n = h.n
    eigs = np.asarray(eigenvalues, dtype=np.complex128).ravel()
    if eigs.size == 0:
        raise ConfigError("empty eigenvalue selection")
    m = eigs.size
    b_r = config.b_r if config.b_r is not None else min(128, n)
    grid = TileGrid(n, b_r)
    is_cplx = eigs.imag != 0.0
    order = np.argsort(is_cplx, kind="stable")  # real first, stable
    inv_order = np.argsort(order, kind="stable")
    sorted_eigs = eigs[order]
    m1 = int(np.count_nonzero(~is_cplx))

    if config.w_max is not None:
        g = config.w_max // (2 * n * grid.N)
        if g < 1:
            raise ConfigError(
                f"workspace cap w_max={config.w_max} below one complex cross-over "
                f"set (2*n*N = {2 * n * grid.N})"
            )
    else:
        g = max(1, m)

    ws = Workspace()
    vectors = np.zeros((n, m), dtype=np.complex128)
    conv = np.zeros(m, dtype=bool)
    restarts = np.zeros(m, dtype=np.int64)
    norms = np.zeros(m)

    for lo in range(0, m1, 2 * g):
        hi = min(lo + 2 * g, m1)
        res = dhsrq3in(h, sorted_eigs[lo:hi].real, config, workspace=ws)
        vectors[:, lo:hi] = res.vectors
        conv[lo:hi] = res.converged
        restarts[lo:hi] = res.restarts
        norms[lo:hi] = res.norms
    for lo in range(m1, m, g):
        hi = min(lo + g, m)
        res = chsrq3in(h, sorted_eigs[lo:hi], config, workspace=ws)
        vectors[:, lo:hi] = res.vectors
        conv[lo:hi] = res.converged
        restarts[lo:hi] = res.restarts
        norms[lo:hi] = res.norms

    if config.w_max is not None and ws.peak_crossover_reals > config.w_max:
        raise ConfigError(
            f"cross-over workspace exceeded cap: {ws.peak_crossover_reals} > {config.w_max}"
        )

    result = EigvecResult(
        vectors=vectors[:, inv_order],
        converged=conv[inv_order],
        restarts=restarts[inv_order],
        norms=norms[inv_order],
        eigenvalues=eigs.copy(),
    )
    result.peak_crossover_reals = ws.peak_crossover_reals
    return result
