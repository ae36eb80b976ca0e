"""Construction and application of real and complex plane rotations.

Conventions
-----------
A real rotation built from the pair (a, b) satisfies

    [a  b] @ [[c, -s],
              [s,  c]]  =  [0  phi],    phi = hypot(a, b) >= 0,

with c = b / phi and s = -a / phi.  The complex rotation annihilates a real
``a`` against a complex ``v``:

    [a  v] @ [[c, -s],
              [s,  conj(c)]]  =  [0  phi],

with complex c = v / phi, real s = -a / phi and phi = sqrt(a**2 + |v|**2),
so mixed real-complex updates stay cheap.  hypot-based magnitudes keep the
construction free of spurious overflow and underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RealRotation",
    "ComplexRotation",
    "make_real",
    "make_complex",
    "apply_pair",
    "apply_pair_complex",
    "compact_encode",
    "compact_decode",
    "compact_encode_complex",
    "compact_decode_complex",
]


@dataclass(frozen=True)
class RealRotation:
    c: float
    s: float
    phi: float
    degenerate: bool = False


@dataclass(frozen=True)
class ComplexRotation:
    c: complex
    s: float
    phi: float
    degenerate: bool = False


def make_real(a, b):
    """Rotation annihilating ``a`` against ``b``.

    Both inputs zero is a structural violation for solver paths; here it
    yields the identity rotation with the degenerate flag set.
    """
    if a == 0.0 and b == 0.0:
        return RealRotation(1.0, 0.0, 0.0, degenerate=True)
    r = math.hypot(a, b)
    return RealRotation(b / r, -a / r, r)


def make_complex(a, v):
    """Rotation annihilating the real ``a`` against the complex ``v``."""
    v = complex(v)
    if a == 0.0 and v == 0.0:
        return ComplexRotation(complex(1.0, 0.0), 0.0, 0.0, degenerate=True)
    av = math.hypot(v.real, v.imag)
    r = math.hypot(a, av)
    return ComplexRotation(complex(v.real / r, v.imag / r), -a / r, r)


def apply_pair(rot, u, v):
    """Apply the 2x2 rotation to the column pair (u, v)."""
    return rot.c * u - rot.s * v, rot.s * u + rot.c * v


def apply_pair_complex(rot, u, v):
    """Complex variant; the lower-right block carries the conjugate cosine."""
    return rot.c * u - rot.s * v, rot.s * u + rot.c.conjugate() * v


# ---------------------------------------------------------------------------
# Compact single-real storage.
#
# The component smaller in magnitude is stored and the other one is
# reconstructed from c**2 + s**2 = 1, which keeps the square root well
# conditioned.  Window offsets encode which component was stored and the
# sign of the reconstructed one, so the round trip is lossless in both
# signs (a plain store-one-component scheme recovers the rotation only up
# to a global sign, which the backtransform cannot absorb).
#
#   |t| in [0, 1]: t = s, c = +sqrt(1-s^2)
#   |t| in [2, 3]: t - sign(t)*2 = s, c = -sqrt(1-s^2)
#   |t| in [4, 5]: t - sign(t)*4 = c, s = +sqrt(1-c^2)
#   |t| in [6, 7]: t - sign(t)*6 = c, s = -sqrt(1-c^2)
# ---------------------------------------------------------------------------


def compact_encode(rot):
    c, s = rot.c, rot.s
    if abs(s) <= abs(c):
        base = 0.0 if c >= 0.0 else 2.0
        return math.copysign(abs(s) + base, s) if s != 0.0 else base
    base = 4.0 if s >= 0.0 else 6.0
    return math.copysign(abs(c) + base, c) if c != 0.0 else base


def compact_decode(t):
    at = abs(t)
    if at <= 1.0:
        s = t
        c = math.sqrt(max(0.0, 1.0 - s * s))
    elif at <= 3.0:
        s = math.copysign(at - 2.0, t) if at != 2.0 else 0.0
        c = -math.sqrt(max(0.0, 1.0 - s * s))
    elif at <= 5.0:
        c = math.copysign(at - 4.0, t) if at != 4.0 else 0.0
        s = math.sqrt(max(0.0, 1.0 - c * c))
    else:
        c = math.copysign(at - 6.0, t) if at != 6.0 else 0.0
        s = -math.sqrt(max(0.0, 1.0 - c * c))
    return RealRotation(c, s, math.nan)


def compact_encode_complex(rot):
    """Two reals per complex rotation.

    The unit triple (|c|, s) and the unit direction of c are each packed
    with the real scheme.
    """
    ac = abs(rot.c)
    t1 = compact_encode(RealRotation(ac, rot.s, math.nan))
    if ac == 0.0:
        t2 = compact_encode(RealRotation(1.0, 0.0, math.nan))
    else:
        t2 = compact_encode(RealRotation(rot.c.real / ac, rot.c.imag / ac, math.nan))
    return t1, t2


def compact_decode_complex(t1, t2):
    mag = compact_decode(t1)
    direction = compact_decode(t2)
    ac = mag.c
    return ComplexRotation(complex(ac * direction.c, ac * direction.s), mag.s, math.nan)


def compact_encode_table(c, s):
    out = np.empty_like(c)
    it = np.nditer([c, s], flags=["multi_index"])
    for cv, sv in it:
        out[it.multi_index] = compact_encode(RealRotation(float(cv), float(sv), math.nan))
    return out


def compact_decode_table(packed):
    c = np.empty_like(packed)
    s = np.empty_like(packed)
    it = np.nditer(packed, flags=["multi_index"])
    for tv in it:
        r = compact_decode(float(tv))
        c[it.multi_index] = r.c
        s[it.multi_index] = r.s
    return c, s


def compact_encode_table_complex(c_re, c_im, s):
    t1 = np.empty_like(s)
    t2 = np.empty_like(s)
    it = np.nditer([c_re, c_im, s], flags=["multi_index"])
    for cr, ci, sv in it:
        a, b = compact_encode_complex(
            ComplexRotation(complex(float(cr), float(ci)), float(sv), math.nan)
        )
        t1[it.multi_index] = a
        t2[it.multi_index] = b
    return np.stack([t1, t2])


def compact_decode_table_complex(packed):
    t1, t2 = packed[0], packed[1]
    c_re = np.empty_like(t1)
    c_im = np.empty_like(t1)
    s = np.empty_like(t1)
    it = np.nditer([t1, t2], flags=["multi_index"])
    for a, b in it:
        r = compact_decode_complex(float(a), float(b))
        c_re[it.multi_index] = r.c.real
        c_im[it.multi_index] = r.c.imag
        s[it.multi_index] = r.s
    return c_re, c_im, s
