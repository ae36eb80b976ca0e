"""Kernel backend selection.

The numba backend is the default when numba imports cleanly; set
``HESSRQ_BACKEND=numpy`` to force the vectorized-numpy fallback (or
``HESSRQ_BACKEND=numba`` to insist on the jitted path).  Both backends
export the same function set; ``set_backend``/``get_backend`` switch at
runtime, which the benchmark harness uses to compare them.
"""

from __future__ import annotations

import os

from . import numpy_backend

_BACKENDS = {"numpy": numpy_backend}
_numba_import_error = None
try:
    from . import numba_backend

    _BACKENDS["numba"] = numba_backend
except ImportError as exc:  # pragma: no cover - exercised only without numba
    _numba_import_error = exc


def _default_name():
    env = os.environ.get("HESSRQ_BACKEND", "").strip().lower()
    if env:
        if env not in ("numpy", "numba"):
            raise ValueError(f"HESSRQ_BACKEND must be 'numpy' or 'numba', got {env!r}")
        if env == "numba" and "numba" not in _BACKENDS:
            raise ImportError(
                "HESSRQ_BACKEND=numba but numba is unavailable"
            ) from _numba_import_error
        return env
    return "numba" if "numba" in _BACKENDS else "numpy"


_active_name = _default_name()


def available_backends():
    return sorted(_BACKENDS)


def get_backend(name=None):
    if name is None:
        return _BACKENDS[_active_name]
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    return _BACKENDS[name]


def backend_name():
    return _active_name


def set_backend(name):
    """Switch the active backend; returns the previous name."""
    global _active_name
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    prev = _active_name
    _active_name = name
    return prev


unpack_status = numpy_backend.unpack_status
KIND_DEGENERATE = numpy_backend.KIND_DEGENERATE
KIND_SINGULAR = numpy_backend.KIND_SINGULAR
