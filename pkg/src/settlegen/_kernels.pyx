# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled kernels; contracts match ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t
from libc.math cimport INFINITY, isfinite
from libcpp.pair cimport pair
from libcpp.queue cimport priority_queue
from libcpp.vector cimport vector

cnp.import_array()


cdef inline long long iabs(long long v) noexcept nogil:
    return -v if v < 0 else v


def astar(cost, start, goal, heights=None, long max_step=1):
    cdef double[:, ::1] c = np.ascontiguousarray(cost, dtype=np.float64)
    cdef Py_ssize_t nx = c.shape[0], nz = c.shape[1]
    cdef long sx = start[0], sz = start[1], gx = goal[0], gz = goal[1]
    cdef bint use_h = heights is not None
    cdef cnp.int64_t[:, ::1] h
    if use_h:
        h = np.ascontiguousarray(heights, dtype=np.int64)
    if not isfinite(c[gx, gz]) or not isfinite(c[sx, sz]):
        return None
    finite = np.isfinite(np.asarray(c))
    cdef double hscale = float(np.asarray(c)[finite].min())
    if hscale < 0:
        raise ValueError("costs must be non-negative")
    cdef Py_ssize_t n = nx * nz
    g_arr = np.full(n, INFINITY, dtype=np.float64)
    parent_arr = np.full(n, -1, dtype=np.int64)
    closed_arr = np.zeros(n, dtype=np.uint8)
    cdef double[::1] g = g_arr
    cdef cnp.int64_t[::1] parent = parent_arr
    cdef unsigned char[::1] closed = closed_arr
    cdef long long start_i = sx * nz + sz, goal_i = gx * nz + gz
    cdef long long cur, nb
    cdef long cx, cz, ax, az, k
    cdef double ng, f, cc
    # max-heap on (-f, -flat): smallest f first, then smallest flat index
    cdef priority_queue[pair[double, int64_t]] heap
    g[start_i] = 0.0
    heap.push(pair[double, int64_t](-((iabs(sx - gx) + iabs(sz - gz)) * hscale), -start_i))
    cdef long dx[4]
    cdef long dz[4]
    dx[:] = [-1, 1, 0, 0]
    dz[:] = [0, 0, -1, 1]
    while not heap.empty():
        cur = -heap.top().second
        heap.pop()
        if closed[cur]:
            continue
        if cur == goal_i:
            path = []
            while cur != -1:
                path.append(cur)
                cur = parent[cur]
            path.reverse()
            return path, g[goal_i]
        closed[cur] = 1
        cx = cur // nz
        cz = cur % nz
        for k in range(4):
            ax = cx + dx[k]
            az = cz + dz[k]
            if ax < 0 or ax >= nx or az < 0 or az >= nz:
                continue
            nb = ax * nz + az
            if closed[nb]:
                continue
            cc = c[ax, az]
            if not isfinite(cc):
                continue
            if use_h and iabs(h[ax, az] - h[cx, cz]) > max_step:
                continue
            ng = g[cur] + cc
            if ng < g[nb]:
                g[nb] = ng
                parent[nb] = cur
                f = ng + (iabs(ax - gx) + iabs(az - gz)) * hscale
                heap.push(pair[double, int64_t](-f, -nb))
    return None


def grid_reach(passable, heights, long max_step, start):
    cdef unsigned char[:, ::1] p = np.ascontiguousarray(passable, dtype=np.uint8)
    cdef cnp.int64_t[:, ::1] h = np.ascontiguousarray(heights, dtype=np.int64)
    cdef Py_ssize_t nx = p.shape[0], nz = p.shape[1]
    out = np.zeros((nx, nz), dtype=bool)
    cdef unsigned char[:, ::1] seen = out.view(np.uint8)
    cdef long sx = start[0], sz = start[1]
    if not p[sx, sz]:
        return out
    cdef vector[long] queue
    cdef size_t head = 0
    cdef long cur, cx, cz, ax, az, k
    cdef long dx[4]
    cdef long dz[4]
    dx[:] = [-1, 1, 0, 0]
    dz[:] = [0, 0, -1, 1]
    seen[sx, sz] = 1
    queue.push_back(sx * nz + sz)
    while head < queue.size():
        cur = queue[head]
        head += 1
        cx = cur // nz
        cz = cur % nz
        for k in range(4):
            ax = cx + dx[k]
            az = cz + dz[k]
            if ax < 0 or ax >= nx or az < 0 or az >= nz:
                continue
            if seen[ax, az] or not p[ax, az] or iabs(h[ax, az] - h[cx, cz]) > max_step:
                continue
            seen[ax, az] = 1
            queue.push_back(ax * nz + az)
    return out


def walk_bfs(standing, start):
    cdef unsigned char[:, :, ::1] s = np.ascontiguousarray(standing, dtype=np.uint8)
    cdef Py_ssize_t ny = s.shape[0], nz = s.shape[1], nx = s.shape[2]
    out = np.full((ny, nz, nx), -1, dtype=np.int32)
    cdef int[:, :, ::1] d = out
    cdef long x0 = start[0], y0 = start[1], z0 = start[2]
    if not s[y0, z0, x0]:
        return out
    cdef vector[long long] queue
    cdef size_t head = 0
    cdef long long cur, plane = nz * nx
    cdef long x, y, z, ax, ay, az, k, dy
    cdef int nd
    cdef long dx[4]
    cdef long dz[4]
    dx[:] = [-1, 1, 0, 0]
    dz[:] = [0, 0, -1, 1]
    d[y0, z0, x0] = 0
    queue.push_back((y0 * nz + z0) * nx + x0)
    while head < queue.size():
        cur = queue[head]
        head += 1
        y = cur // plane
        z = (cur % plane) // nx
        x = cur % nx
        nd = d[y, z, x] + 1
        for k in range(4):
            ax = x + dx[k]
            az = z + dz[k]
            if ax < 0 or ax >= nx or az < 0 or az >= nz:
                continue
            for dy in range(-1, 2):
                ay = y + dy
                if ay < 0 or ay >= ny:
                    continue
                if s[ay, az, ax] and d[ay, az, ax] < 0:
                    d[ay, az, ax] = nd
                    queue.push_back((ay * nz + az) * nx + ax)
    return out


def light_bfs(passable, sources, int emission):
    cdef unsigned char[:, :, ::1] p = np.ascontiguousarray(passable, dtype=np.uint8)
    src = np.ascontiguousarray(sources, dtype=bool) & np.asarray(p, dtype=bool)
    cdef Py_ssize_t ny = p.shape[0], nz = p.shape[1], nx = p.shape[2]
    out = np.zeros((ny, nz, nx), dtype=np.uint8)
    cdef unsigned char[:, :, ::1] lv = out
    cdef vector[long long] queue
    cdef size_t head = 0
    cdef long long cur, plane = nz * nx
    cdef long x, y, z, ax, ay, az, k
    cdef int nl
    cdef long ddx[6]
    cdef long ddy[6]
    cdef long ddz[6]
    ddx[:] = [-1, 1, 0, 0, 0, 0]
    ddy[:] = [0, 0, -1, 1, 0, 0]
    ddz[:] = [0, 0, 0, 0, -1, 1]
    if emission <= 0:
        return out
    for idx in np.flatnonzero(src.ravel()):
        cur = idx
        y = cur // plane
        z = (cur % plane) // nx
        x = cur % nx
        lv[y, z, x] = emission
        queue.push_back(cur)
    while head < queue.size():
        cur = queue[head]
        head += 1
        y = cur // plane
        z = (cur % plane) // nx
        x = cur % nx
        nl = lv[y, z, x] - 1
        if nl <= 0:
            continue
        for k in range(6):
            ax = x + ddx[k]
            ay = y + ddy[k]
            az = z + ddz[k]
            if ax < 0 or ax >= nx or ay < 0 or ay >= ny or az < 0 or az >= nz:
                continue
            if p[ay, az, ax] and lv[ay, az, ax] < nl:
                lv[ay, az, ax] = nl
                queue.push_back((ay * nz + az) * nx + ax)
    return out
