"""A* over 2D cost grids."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import kernels


class Path(NamedTuple):
    cells: list[tuple[int, int]]
    cost: float


def astar(cost, start, goal, heights=None, max_step: int = 1) -> Path | None:
    """Minimum-cost 4-connected path on ``cost[x, z]``.

    Entering a cell costs its value; ``inf`` marks impassable cells. The
    heuristic is Manhattan distance times the smallest finite cell cost.
    When ``heights`` is given, a step whose height change exceeds
    ``max_step`` is forbidden. Returns None if ``goal`` is unreachable.
    """
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    nx, nz = cost.shape
    for name, (x, z) in (("start", start), ("goal", goal)):
        if not (0 <= x < nx and 0 <= z < nz):
            raise IndexError(f"{name} {(x, z)} outside {nx}x{nz} grid")
    if (cost[np.isfinite(cost)] < 0).any():
        raise ValueError("costs must be non-negative")
    if heights is not None:
        heights = np.ascontiguousarray(heights, dtype=np.int64)
    found = kernels.astar(cost, tuple(start), tuple(goal), heights, max_step)
    if found is None:
        return None
    flat, total = found
    return Path([divmod(int(i), nz) for i in flat], float(total))
