"""Kernel backend selection.

The compiled extension is used when it imports; setting ``POLYNET_PURE_PYTHON=1``
forces the numpy fallback.  ``use_backend`` switches at runtime (tests and the
benchmark compare both).
"""
from __future__ import annotations

import os
from contextlib import contextmanager

from . import _pykernels

try:
    from . import _kernels as _ckernels
except ImportError:  # extension not built
    _ckernels = None

_FORCE_PY = os.environ.get("POLYNET_PURE_PYTHON", "").strip() not in ("", "0")

kernels = _pykernels if (_FORCE_PY or _ckernels is None) else _ckernels


def backend_name() -> str:
    return "cython" if kernels is _ckernels else "python"


def compiled_available() -> bool:
    return _ckernels is not None


def set_backend(name: str) -> None:
    global kernels
    if name == "python":
        kernels = _pykernels
    elif name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built")
        kernels = _ckernels
    else:
        raise ValueError(f"unknown backend {name!r}")


@contextmanager
def use_backend(name: str):
    previous = backend_name()
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def get_kernels():
    return kernels
