"""Kernel selection: compiled extension when importable, numpy otherwise.

Set ``QE_KERNELS=python`` to force the fallback, ``QE_KERNELS=cython`` to
make a missing extension an import error.
"""
from __future__ import annotations

import os

import numpy as np

from quasieinstein import _pykernels as python_kernels
from quasieinstein._pykernels import NotPositiveDefinite

_choice = os.environ.get("QE_KERNELS", "").strip().lower()

compiled_kernels = None
if _choice != "python":
    try:
        from quasieinstein import _ckernels as compiled_kernels
    except ImportError:
        if _choice == "cython":
            raise

_impl = compiled_kernels if compiled_kernels is not None and _choice != "python" else python_kernels
BACKEND = "cython" if _impl is compiled_kernels and compiled_kernels is not None else "python"


def metric_inverse(g):
    return _impl.metric_inverse(np.ascontiguousarray(g, dtype=float))


def christoffel(ginv, dg):
    return _impl.christoffel(np.ascontiguousarray(ginv, dtype=float), np.ascontiguousarray(dg, dtype=float))


def ricci(gam, dgam):
    return _impl.ricci(np.ascontiguousarray(gam, dtype=float), np.ascontiguousarray(dgam, dtype=float))


__all__ = [
    "BACKEND",
    "NotPositiveDefinite",
    "christoffel",
    "compiled_kernels",
    "metric_inverse",
    "python_kernels",
    "ricci",
]
