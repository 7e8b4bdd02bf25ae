"""Kernel selection: the compiled extension when importable, else the
pure-Python twin. Set ``SCENRUN_PURE_PYTHON=1`` to force the fallback."""

import os

from . import _kernels_py

if os.environ.get("SCENRUN_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

BACKEND = "compiled" if _impl is not _kernels_py else "python"

astar = _impl.astar
line_of_sight = _impl.line_of_sight
inflate = _impl.inflate
trilaterate = _impl.trilaterate
OK, DIVERGED, SINGULAR = _kernels_py.OK, _kernels_py.DIVERGED, _kernels_py.SINGULAR

__all__ = ["BACKEND", "DIVERGED", "OK", "SINGULAR", "astar", "inflate", "line_of_sight", "trilaterate"]
