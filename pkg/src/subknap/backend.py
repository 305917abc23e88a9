"""Evaluation backend selection.

The hot kernels (set-function evaluation and the 2^k expansion over a
fractional support) have two interchangeable implementations: numba-jitted
(default when numba imports) and pure numpy/Python. Selection:

    SUBKNAP_BACKEND=numba   require the jitted kernels (raise if unavailable)
    SUBKNAP_BACKEND=numpy   force the fallback
    unset / auto            numba when importable, else numpy

`select_backend` switches at runtime (used by tests and the backend benchmark).
"""

from __future__ import annotations

import os

from . import _backend_numpy

_numba_impl = None
_numba_error = None
try:
    from . import _backend_numba as _numba_impl
except ImportError as exc:  # pragma: no cover - depends on environment
    _numba_error = exc

_IMPL = None
_NAME = ""


def select_backend(name: str) -> str:
    global _IMPL, _NAME
    name = name.strip().lower() or "auto"
    if name == "auto":
        name = "numba" if _numba_impl is not None else "numpy"
    if name == "numpy":
        _IMPL = _backend_numpy
    elif name == "numba":
        if _numba_impl is None:
            raise RuntimeError(f"numba backend requested but unavailable: {_numba_error}")
        _IMPL = _numba_impl
    else:
        raise ValueError(f"unknown backend {name!r} (expected numba, numpy, or auto)")
    _NAME = name
    return _NAME


def active_backend() -> str:
    return _NAME


def eval_set(comp, ids) -> float:
    return _IMPL.eval_set(comp, ids)


def subset_values(comp, base, frac):
    return _IMPL.subset_values(comp, base, frac)


def warmup() -> None:
    """Pre-compile jitted kernels so timed runs exclude compilation."""
    if _IMPL is _numba_impl and _numba_impl is not None:
        _numba_impl.warmup()


select_backend(os.environ.get("SUBKNAP_BACKEND", "auto"))
