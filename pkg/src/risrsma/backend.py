"""Kernel backend selection.

The hot kernels in _kernels_impl.py are written so the same source runs
either interpreted (plain NumPy) or compiled by numba.  The active backend is
chosen once per process from the RISRSMA_BACKEND environment variable:

    RISRSMA_BACKEND=numba   (default) compile kernels with numba @njit
    RISRSMA_BACKEND=numpy   pure NumPy fallback, no numba required

load_kernels() builds fresh, independent instances of the kernel module, so
tests and benchmarks can hold both backends in one process and compare them.
"""
from __future__ import annotations

import importlib.util
import os
import sys
from types import ModuleType

_ENV_VAR = "RISRSMA_BACKEND"
_IMPL = "risrsma._kernels_impl"


def requested_backend() -> str:
    value = os.environ.get(_ENV_VAR, "numba").strip().lower()
    if value not in ("numba", "numpy"):
        raise ValueError(
            f"{_ENV_VAR} must be 'numba' or 'numpy', got {value!r}"
        )
    return value


def numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def load_kernels(backend: str) -> ModuleType:
    """Fresh kernel-module instance, optionally numba-compiled.

    The instance is independent of the regular import cache, so decorating
    it never mutates another backend's functions.
    """
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    spec = importlib.util.find_spec(_IMPL)
    if spec is None or spec.loader is None:
        raise ImportError(f"cannot locate {_IMPL}")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    mod.BACKEND = backend
    if backend == "numba":
        import numba

        for name in mod._JIT_EXPORTS:
            setattr(mod, name, numba.njit(cache=True)(getattr(mod, name)))
    return mod


def active_backend() -> str:
    """Backend the package runs with: the requested one, degraded to numpy
    when numba is not importable."""
    backend = requested_backend()
    if backend == "numba" and not numba_available():
        print(
            "risrsma: numba not available, falling back to the numpy backend",
            file=sys.stderr,
        )
        return "numpy"
    return backend
