"""Shared containers: Hessenberg matrices, tilings, shift batches, rotation
tables, cross-over columns and scaling factors.

All dense storage is column-major (Fortran order) float64.  Complex vectors
are kept in interleaved storage: the real and imaginary parts of a logical
column occupy two adjacent real columns, which lets a real matrix times a
complex block be computed with one real GEMM.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "HessrqError",
    "ConfigError",
    "SingularSystemError",
    "StructuralViolationError",
    "HessenbergMatrix",
    "TileGrid",
    "ShiftBatch",
    "GivensTable",
    "CrossoverSet",
    "ScalingMatrix",
    "SolutionBlock",
    "interleave_complex",
    "deinterleave_complex",
    "write_matrix",
    "read_matrix",
]

_MAGIC = b"HSRQ"
_FORMAT_VERSION = 1


class HessrqError(Exception):
    """Base class for numerical / structural failures."""


class ConfigError(HessrqError):
    """Invalid configuration (tile sizes, workspace caps, selections)."""


class SingularSystemError(HessrqError):
    """An exactly singular triangular factor was encountered."""

    def __init__(self, message, shift_index=None, local_index=None):
        super().__init__(message)
        self.shift_index = shift_index
        self.local_index = local_index


class StructuralViolationError(HessrqError):
    """Input violates the unreduced-Hessenberg structure a kernel relies on."""


class HessenbergMatrix:
    """Immutable dense real upper Hessenberg matrix.

    The backing array is column-major and marked read-only; solvers never
    modify it.  The infinity norm is computed on first use and cached.
    """

    def __init__(self, data):
        a = np.array(data, dtype=np.float64, order="F")
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ConfigError(f"expected a square matrix, got shape {a.shape}")
        n = a.shape[0]
        if n >= 3:
            low = a[2:, :-2]
            if np.any(low[np.tril_indices(n - 2)] != 0.0):
                raise ConfigError("matrix has nonzeros below the first subdiagonal")
        a.setflags(write=False)
        self.n = n
        self.data = a
        self._norm_inf = None

    def infinity_norm(self):
        """Maximum absolute row sum; cached after the first call."""
        if self._norm_inf is None:
            self._norm_inf = float(np.max(np.sum(np.abs(self.data), axis=1)))
        return self._norm_inf

    def is_unreduced(self):
        """True iff every subdiagonal entry is nonzero."""
        if self.n == 1:
            return True
        sub = self.data[np.arange(1, self.n), np.arange(0, self.n - 1)]
        return bool(np.all(sub != 0.0))

    def subdiagonal(self):
        return self.data[np.arange(1, self.n), np.arange(0, self.n - 1)].copy()

    def __repr__(self):
        return f"HessenbergMatrix(n={self.n})"


def as_hessenberg(h):
    return h if isinstance(h, HessenbergMatrix) else HessenbergMatrix(h)


class TileGrid:
    """Partition of the row/column index range 0..n into contiguous tiles.

    All tiles have ``b_r`` rows except possibly the last, which may be
    shorter when ``b_r`` does not divide ``n``.
    """

    def __init__(self, n, b_r):
        if not (1 <= b_r <= n):
            raise ConfigError(f"tile size b_r={b_r} out of range for n={n}")
        self.n = n
        self.b_r = b_r
        starts = list(range(0, n, b_r))
        self.ranges = [(s, min(s + b_r, n)) for s in starts]
        self.N = len(self.ranges)

    def tile_of(self, i):
        return i // self.b_r

    def tile_slice(self, t):
        s, e = self.ranges[t]
        return slice(s, e)

    def __repr__(self):
        return f"TileGrid(n={self.n}, b_r={self.b_r}, N={self.N})"


class ShiftBatch:
    """A set of shifts processed in contiguous batches of width ``b_c``.

    ``kind`` is "real" or "complex".  A complex batch carries one member of
    each conjugate pair; the drivers synthesize the conjugate solutions.
    """

    def __init__(self, shifts, b_c, kind=None):
        shifts = np.asarray(shifts)
        if kind is None:
            kind = "complex" if np.iscomplexobj(shifts) else "real"
        if kind == "real":
            self.values = np.asarray(shifts, dtype=np.float64).ravel().copy()
        elif kind == "complex":
            self.values = np.asarray(shifts, dtype=np.complex128).ravel().copy()
        else:
            raise ConfigError(f"unknown shift kind {kind!r}")
        self.kind = kind
        self.m = self.values.shape[0]
        if self.m == 0:
            raise ConfigError("empty shift batch")
        if not (1 <= b_c):
            raise ConfigError(f"batch width b_c={b_c} must be positive")
        self.b_c = min(b_c, self.m)
        starts = list(range(0, self.m, self.b_c))
        self.ranges = [(s, min(s + self.b_c, self.m)) for s in starts]
        self.M = len(self.ranges)

    @property
    def is_complex(self):
        return self.kind == "complex"

    def __repr__(self):
        return f"ShiftBatch(kind={self.kind}, m={self.m}, b_c={self.b_c})"


@dataclass
class GivensTable:
    """Recorded rotation components, one column per shift.

    Row ``j`` (0-based, j >= 1) stores the rotation mixing columns j-1 and j.
    Row 0 is padding (c=1, s=0) except where a cross-tile rotation exists;
    globally row 0 is always the identity padding since no rotation
    annihilates anything left of column 0.

    Real case: ``c_im`` is None.  Complex case: the cosine is
    ``c_re + i*c_im`` and the sine is real.
    """

    c_re: np.ndarray
    s: np.ndarray
    c_im: np.ndarray | None = None

    @property
    def is_complex(self):
        return self.c_im is not None

    @property
    def shape(self):
        return self.c_re.shape

    def compact(self):
        """Single-real-per-rotation encoding (two reals in the complex case)."""
        from . import givens

        if not self.is_complex:
            return givens.compact_encode_table(self.c_re, self.s)
        return givens.compact_encode_table_complex(self.c_re, self.c_im, self.s)

    @classmethod
    def from_compact(cls, packed, is_complex=False):
        from . import givens

        if not is_complex:
            c, s = givens.compact_decode_table(packed)
            return cls(c_re=c, s=s)
        c_re, c_im, s = givens.compact_decode_table_complex(packed)
        return cls(c_re=c_re, s=s, c_im=c_im)


@dataclass
class CrossoverSet:
    """Per-shift cross-over columns, one per tile column.

    ``data`` has shape (n, N, m) in the real case and (n, N, 2m) interleaved
    in the complex case.  Entry block (rows of tile i, tile column t) holds
    the cross-over column of tile column t restricted to tile row i; only
    row ranges at or above the diagonal tile are meaningful.
    """

    data: np.ndarray
    is_complex: bool = False

    @property
    def n(self):
        return self.data.shape[0]

    @property
    def N(self):
        return self.data.shape[1]


@dataclass
class ScalingMatrix:
    """Segment-wise scaling factors alpha in (0, 1], one per (tile row, shift).

    The stored solution segment X(tile i, l) represents
    alpha(i, l)**-1 * X(tile i, l).
    """

    alpha: np.ndarray

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=np.float64)

    def all_ones(self):
        return bool(np.all(self.alpha == 1.0))


@dataclass
class SolutionBlock:
    """Solutions plus their per-column global scales and status flags."""

    x: np.ndarray
    alpha: np.ndarray
    segment_scales: ScalingMatrix | None = None
    norms: np.ndarray | None = None
    converged: np.ndarray | None = None
    flops: dict = field(default_factory=dict)


class Workspace:
    """Reusable scratch buffers keyed by role.

    Grouped drivers process eigenvalues in chunks and reuse one allocation
    across chunks; the high-water mark of cross-over storage (in reals) is
    tracked so workspace caps can be verified.
    """

    def __init__(self):
        self._bufs = {}
        self.peak_crossover_reals = 0

    def take(self, key, shape, dtype=np.float64, crossover=False):
        size = int(np.prod(shape))
        buf = self._bufs.get(key)
        if buf is None or buf.size < size or buf.dtype != np.dtype(dtype):
            buf = np.empty(size, dtype=dtype)
            self._bufs[key] = buf
        if crossover:
            self.peak_crossover_reals = max(self.peak_crossover_reals, size)
        return buf[:size].reshape(shape)


def interleave_complex(z):
    """(n, m) complex -> (n, 2m) float with re/im in adjacent columns."""
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty((z.shape[0], 2 * z.shape[1]), dtype=np.float64)
    out[:, 0::2] = z.real
    out[:, 1::2] = z.imag
    return out


def deinterleave_complex(x):
    """(n, 2m) float interleaved -> (n, m) complex."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[1] % 2:
        raise ConfigError("interleaved array must have an even column count")
    return x[:, 0::2] + 1j * x[:, 1::2]


def write_matrix(path, h, fmt="bin"):
    """Write a matrix in the solver's file format.

    Binary: header (magic "HSRQ", version u32, n u32, flags u32, little
    endian) followed by n*n column-major float64.  Text: n on the first
    line, then n*n whitespace-separated values in row-major order.
    """
    a = h.data if isinstance(h, HessenbergMatrix) else np.asarray(h, dtype=np.float64)
    n = a.shape[0]
    if fmt == "bin":
        with open(path, "wb") as f:
            f.write(_MAGIC)
            f.write(struct.pack("<III", _FORMAT_VERSION, n, 0))
            f.write(np.asfortranarray(a).tobytes(order="F"))
    elif fmt == "text":
        with open(path, "w") as f:
            f.write(f"{n}\n")
            for i in range(n):
                f.write(" ".join(repr(float(v)) for v in a[i, :]))
                f.write("\n")
    else:
        raise ConfigError(f"unknown matrix format {fmt!r}")


def read_matrix(path):
    """Read a matrix written by :func:`write_matrix` (format auto-detected)."""
    with open(path, "rb") as f:
        head = f.read(4)
        if head == _MAGIC:
            version, n, _flags = struct.unpack("<III", f.read(12))
            if version != _FORMAT_VERSION:
                raise ConfigError(f"unsupported matrix file version {version}")
            raw = f.read(8 * n * n)
            if len(raw) != 8 * n * n:
                raise ConfigError("matrix file truncated")
            a = np.frombuffer(raw, dtype="<f8").reshape((n, n), order="F")
            return HessenbergMatrix(a)
    # fall through: plain text
    with open(path) as f:
        tokens = f.read().split()
    if not tokens:
        raise ConfigError("empty matrix file")
    n = int(tokens[0])
    vals = np.array([float(t) for t in tokens[1:]], dtype=np.float64)
    if vals.size != n * n:
        raise ConfigError(f"expected {n * n} values, found {vals.size}")
    return HessenbergMatrix(vals.reshape((n, n)))
