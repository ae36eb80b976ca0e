"""Overflow-protection primitives: scaling computation and guarded solves.

The working threshold omega is the true overflow limit divided by two (to
absorb rounding slack in norm estimates) and further by the tile height:
rotations inside a tile are applied without per-step guard logic, and the
tile-height margin overestimates the growth they can cause.  Everything a
guarded kernel stores therefore stays below omega * b_r, which is within
the representable range.

The factorization sweep itself (reduction phase) is intentionally
unguarded; only backward substitutions, linear updates and the
backtransform are protected.  All scaling factors are powers of two, so
applying them is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import SingularSystemError

__all__ = ["OverflowBudget", "protect_update", "robust_trsv", "robust_trsv_complex"]

_MAX = float(np.finfo(np.float64).max)


@dataclass(frozen=True)
class OverflowBudget:
    omega: float
    safety_divisor: int = 1

    def __post_init__(self):
        if not (0.0 < self.omega <= _MAX / 2.0):
            raise ValueError(f"omega={self.omega} outside (0, maxfloat/2]")
        if self.omega * self.safety_divisor > _MAX:
            raise ValueError("omega * safety_divisor exceeds the representable range")

    @classmethod
    def for_tile_rows(cls, b_r):
        return cls(omega=_MAX / 2.0 / b_r, safety_divisor=int(b_r))

    @classmethod
    def for_grid(cls, grid):
        return cls.for_tile_rows(grid.b_r)


def protect_update(bnorm, hnorm, xnorm, budget):
    """Power-of-two xi in (0,1] with xi*bnorm + hnorm*(xi*xnorm) <= omega.

    Returns 1 whenever the unscaled bound already fits; non-increasing in
    each norm argument.
    """
    k = _kernels.get_backend()
    return float(k.protect_update(float(bnorm), float(hnorm), float(xnorm), budget.omega))


def robust_trsv(r, b, budget, robust=True):
    """Solve R x = gamma b for upper-triangular R without overflow.

    Returns (x, gamma) with gamma in (0,1] a power of two.  When no scaling
    triggers, the operation sequence is classical column-oriented backward
    substitution and gamma is 1.
    """
    r = np.ascontiguousarray(r, dtype=np.float64)
    x = np.array(b, dtype=np.float64).ravel().copy()
    k = _kernels.get_backend()
    status, gamma = k.robust_trsv(r, x, robust, budget.omega)
    if status != 0:
        _, _, row = _kernels.unpack_status(status)
        raise SingularSystemError(f"zero diagonal at index {row}", local_index=row)
    return x, float(gamma)


def robust_trsv_complex(r, b, budget, robust=True):
    """Complex variant; real and imaginary parts share one real gamma."""
    r = np.ascontiguousarray(r, dtype=np.complex128)
    x = np.array(b, dtype=np.complex128).ravel().copy()
    k = _kernels.get_backend()
    status, gamma = k.robust_trsv_complex(r, x, robust, budget.omega)
    if status != 0:
        _, _, row = _kernels.unpack_status(status)
        raise SingularSystemError(f"zero diagonal at index {row}", local_index=row)
    return x, float(gamma)
