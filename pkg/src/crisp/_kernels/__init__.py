"""Hot kernels, compiled when available.

The Cython extension ``_ckernels`` is used when it imports; otherwise the
numpy implementation in ``_pykernels`` is selected.  Setting
``CRISP_PURE_PYTHON=1`` forces the numpy path.
"""
from __future__ import annotations

import os

from . import _pykernels

_compiled = None
if os.environ.get("CRISP_PURE_PYTHON", "").lower() not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _compiled
    except ImportError:
        _compiled = None

_impl = _compiled if _compiled is not None else _pykernels
BACKEND = "cython" if _compiled is not None else "python"


def available_backends():
    names = ["python"]
    try:
        from . import _ckernels  # noqa: F401
        names.append("cython")
    except ImportError:
        pass
    return names


def get_backend(name):
    """Return the kernel module for ``name`` ("python" or "cython")."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


splat = _impl.splat
slice_grid = _impl.slice_grid
gauss_pairwise = _impl.gauss_pairwise
hill_climb = _impl.hill_climb

__all__ = [
    "BACKEND",
    "available_backends",
    "get_backend",
    "splat",
    "slice_grid",
    "gauss_pairwise",
    "hill_climb",
]
