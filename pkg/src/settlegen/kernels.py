"""Kernel dispatch: the compiled extension when it imports, else the
pure-Python fallback. Set SETTLEGEN_PURE_PYTHON=1 to force the fallback."""

import os

from . import _kernels_py

if os.environ.get("SETTLEGEN_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

BACKEND = "compiled" if _impl is not _kernels_py else "python"

astar = _impl.astar
grid_reach = _impl.grid_reach
walk_bfs = _impl.walk_bfs
light_bfs = _impl.light_bfs
