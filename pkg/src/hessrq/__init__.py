"""hessrq: tiled, overflow-robust solves of shifted Hessenberg systems
(H - lam_l I) x_l = alpha_l b_l for many shifts at once, and inverse
iteration for eigenvectors of unreduced upper Hessenberg matrices.

Hot kernels are numba-jitted with a vectorized numpy fallback; select with
the HESSRQ_BACKEND environment variable ("numba"/"numpy") or
:func:`set_backend`.
"""

from ._kernels import available_backends, backend_name, set_backend
from .core import (
    ConfigError,
    CrossoverSet,
    GivensTable,
    HessenbergMatrix,
    HessrqError,
    ScalingMatrix,
    ShiftBatch,
    SingularSystemError,
    SolutionBlock,
    StructuralViolationError,
    TileGrid,
    Workspace,
    deinterleave_complex,
    interleave_complex,
    read_matrix,
    write_matrix,
)
from .givens import (
    ComplexRotation,
    RealRotation,
    apply_pair,
    apply_pair_complex,
    compact_decode,
    compact_decode_complex,
    compact_encode,
    compact_encode_complex,
    make_complex,
    make_real,
)
from .overflow import OverflowBudget, protect_update, robust_trsv, robust_trsv_complex
from .reduce import creduce_diag, creduce_offdiag, reduce_diag, reduce_offdiag, tiled_reduce
from .backsolve import (
    backtransform,
    chsrq3,
    crsolve_tile,
    csolve_tile,
    dhsrq3,
    rbacktransform,
    robust_tiled_solve,
    rsolve_tile,
    rupdate_tile,
    solve_tile,
    tiled_solve,
    update_tile,
)
from .inviter import (
    EigvecResult,
    InviterConfig,
    chsrq3in,
    converged,
    dhsrq3in,
    hsrq3in,
    starting_vector,
)
from .reference import dense_solve_oracle, henry_rq_solve, hessenberg_lu_invit
from .scheduler import RunStats, TaskGraph, TaskNode, build_reduce_dag, build_solve_dag, execute
from .testprob import gen_h1, gen_h2, gen_h3, householder_hessenberg, splitmix64

__version__ = "0.1.0"
