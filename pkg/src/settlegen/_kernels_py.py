"""Pure-Python kernels. Same contracts as the compiled ``_kernels`` module,
used when the extension is unavailable or SETTLEGEN_PURE_PYTHON is set.

Grid conventions: 2D fields are indexed ``[x, z]`` with flat index
``x * nz + z``; 3D fields are indexed ``[y, z, x]``.
"""

from __future__ import annotations

import heapq
import math
from collections import deque

import numpy as np


def astar(cost, start, goal, heights=None, max_step=1):
    """Cheapest 4-connected path from ``start`` to ``goal``.

    Entering a cell costs ``cost[x, z]``; non-finite cost means impassable.
    With ``heights`` given, steps whose height difference exceeds
    ``max_step`` are forbidden. Returns ``(flat_indices, total_cost)`` or
    None when the goal is unreachable. Equal f-scores pop the smaller flat
    index first.
    """
    cost = np.asarray(cost, dtype=np.float64)
    nx, nz = cost.shape
    sx, sz = start
    gx, gz = goal
    finite = np.isfinite(cost)
    if not finite[gx, gz] or not finite[sx, sz]:
        return None
    hscale = float(cost[finite].min())
    if hscale < 0:
        raise ValueError("costs must be non-negative")
    costs = cost.ravel().tolist()
    hts = None if heights is None else np.asarray(heights).ravel().tolist()
    start_i = sx * nz + sz
    goal_i = gx * nz + gz
    g = {start_i: 0.0}
    parent = {start_i: -1}
    closed = set()
    heap = [((abs(sx - gx) + abs(sz - gz)) * hscale, start_i)]
    inf = math.inf
    while heap:
        _, cur = heapq.heappop(heap)
        if cur in closed:
            continue
        if cur == goal_i:
            path = []
            while cur != -1:
                path.append(cur)
                cur = parent[cur]
            path.reverse()
            return path, g[goal_i]
        closed.add(cur)
        cx, cz = divmod(cur, nz)
        gcur = g[cur]
        for nxi, nzi in ((cx - 1, cz), (cx + 1, cz), (cx, cz - 1), (cx, cz + 1)):
            if nxi < 0 or nxi >= nx or nzi < 0 or nzi >= nz:
                continue
            nb = nxi * nz + nzi
            if nb in closed:
                continue
            c = costs[nb]
            if c == inf or c != c:
                continue
            if hts is not None and abs(hts[nb] - hts[cur]) > max_step:
                continue
            ng = gcur + c
            if ng < g.get(nb, inf):
                g[nb] = ng
                parent[nb] = cur
                f = ng + (abs(nxi - gx) + abs(nzi - gz)) * hscale
                heapq.heappush(heap, (f, nb))
    return None


def grid_reach(passable, heights, max_step, start):
    """Cells 4-reachable from ``start`` through passable cells whose height
    steps are at most ``max_step``."""
    passable = np.asarray(passable, dtype=bool)
    nx, nz = passable.shape
    seen = np.zeros((nx, nz), dtype=bool)
    sx, sz = start
    if not passable[sx, sz]:
        return seen
    pas = passable.tolist()
    hts = np.asarray(heights).tolist()
    mark = [[False] * nz for _ in range(nx)]
    mark[sx][sz] = True
    queue = deque([(sx, sz)])
    while queue:
        cx, cz = queue.popleft()
        h = hts[cx][cz]
        for ax, az in ((cx - 1, cz), (cx + 1, cz), (cx, cz - 1), (cx, cz + 1)):
            if 0 <= ax < nx and 0 <= az < nz and not mark[ax][az] and pas[ax][az] \
                    and abs(hts[ax][az] - h) <= max_step:
                mark[ax][az] = True
                queue.append((ax, az))
    seen[:] = mark
    return seen


def walk_bfs(standing, start):
    """BFS step counts over standing states (``standing[y, z, x]``) from
    local ``start = (x, y, z)``; moves go to 4-neighbor columns with a
    height change of at most one. Unreached states hold -1."""
    standing = np.asarray(standing, dtype=bool)
    ny, nz, nx = standing.shape
    dist = np.full(standing.shape, -1, dtype=np.int32)
    x0, y0, z0 = start
    if not standing[y0, z0, x0]:
        return dist
    flat = standing.ravel()
    d = dist.ravel()
    plane = nz * nx
    s = (y0 * nz + z0) * nx + x0
    d[s] = 0
    queue = deque([s])
    while queue:
        cur = queue.popleft()
        y, rem = divmod(cur, plane)
        z, x = divmod(rem, nx)
        nd = d[cur] + 1
        for ax, az in ((x - 1, z), (x + 1, z), (x, z - 1), (x, z + 1)):
            if ax < 0 or ax >= nx or az < 0 or az >= nz:
                continue
            for ay in (y - 1, y, y + 1):
                if 0 <= ay < ny:
                    nb = (ay * nz + az) * nx + ax
                    if flat[nb] and d[nb] < 0:
                        d[nb] = nd
                        queue.append(nb)
    return dist


def light_bfs(passable, sources, emission):
    """Block light: ``emission`` at each source, minus one per 6-connected
    step through passable cells, max over sources, floored at zero."""
    passable = np.asarray(passable, dtype=bool)
    level = np.where(np.asarray(sources, dtype=bool) & passable, emission, 0).astype(np.int16)
    for _ in range(emission):
        spread = np.zeros_like(level)
        spread[1:] = np.maximum(spread[1:], level[:-1])
        spread[:-1] = np.maximum(spread[:-1], level[1:])
        spread[:, 1:] = np.maximum(spread[:, 1:], level[:, :-1])
        spread[:, :-1] = np.maximum(spread[:, :-1], level[:, 1:])
        spread[:, :, 1:] = np.maximum(spread[:, :, 1:], level[:, :, :-1])
        spread[:, :, :-1] = np.maximum(spread[:, :, :-1], level[:, :, 1:])
        nxt = np.where(passable, np.maximum(level, spread - 1), 0)
        if np.array_equal(nxt, level):
            break
        level = nxt
    return level.astype(np.uint8)
