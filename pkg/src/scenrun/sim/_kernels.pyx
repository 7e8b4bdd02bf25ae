# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for planning and localization.

Mirrors ``_kernels_py`` operation for operation; see that module for the
contracts.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor, sqrt, fabs, INFINITY
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef double SQRT2 = 1.4142135623730951
cdef double LOS_STEP = 0.25

OK, DIVERGED, SINGULAR = 0, 1, 2

cdef int[8] NDR = [-1, 1, 0, 0, -1, -1, 1, 1]
cdef int[8] NDC = [0, 0, -1, 1, -1, 1, -1, 1]


cdef struct HeapItem:
    double f
    long seq
    int idx


cdef inline bint _less(HeapItem a, HeapItem b) nogil:
    if a.f < b.f:
        return True
    if a.f > b.f:
        return False
    return a.seq < b.seq


cdef inline void _push(HeapItem* heap, int* size, HeapItem item) nogil:
    cdef int i = size[0]
    cdef int parent
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _less(item, heap[parent]):
            heap[i] = heap[parent]
            i = parent
        else:
            break
    heap[i] = item


cdef inline HeapItem _pop(HeapItem* heap, int* size) nogil:
    cdef HeapItem top = heap[0]
    cdef HeapItem last
    cdef int i = 0, child, n
    size[0] -= 1
    n = size[0]
    if n > 0:
        last = heap[n]
        while True:
            child = 2 * i + 1
            if child >= n:
                break
            if child + 1 < n and _less(heap[child + 1], heap[child]):
                child += 1
            if _less(heap[child], last):
                heap[i] = heap[child]
                i = child
            else:
                break
        heap[i] = last
    return top


cdef inline double _octile(int r, int c, int gr, int gc) nogil:
    cdef int dr = r - gr if r >= gr else gr - r
    cdef int dc = c - gc if c >= gc else gc - c
    cdef int mn = dr if dr < dc else dc
    cdef int mx = dr if dr > dc else dc
    return <double>(mx - mn) + SQRT2 * <double>mn


def astar(const unsigned char[:, ::1] blocked, int sr, int sc, int gr, int gc):
    cdef int rows = blocked.shape[0]
    cdef int cols = blocked.shape[1]
    if not (0 <= gr < rows and 0 <= gc < cols and 0 <= sr < rows and 0 <= sc < cols):
        return None
    if blocked[gr, gc]:
        return None
    cdef int n = rows * cols
    cdef double* g = <double*>malloc(n * sizeof(double))
    cdef int* parent = <int*>malloc(n * sizeof(int))
    cdef char* closed = <char*>malloc(n * sizeof(char))
    # each cell can be pushed at most 8 times plus the start
    cdef int cap = 8 * n + 1
    cdef HeapItem* heap = <HeapItem*>malloc(cap * sizeof(HeapItem))
    cdef int size = 0
    cdef long seq = 1
    cdef int i, k, cur, r, c, nr, nc, ni, dr, dc
    cdef int start = sr * cols + sc
    cdef int goal = gr * cols + gc
    cdef double ng, gcur, cost
    cdef HeapItem item
    cdef bint found = False
    if g == NULL or parent == NULL or closed == NULL or heap == NULL:
        free(g); free(parent); free(closed); free(heap)
        raise MemoryError()
    try:
        for i in range(n):
            g[i] = INFINITY
            parent[i] = -1
            closed[i] = 0
        g[start] = 0.0
        item.f = _octile(sr, sc, gr, gc)
        item.seq = 0
        item.idx = start
        _push(heap, &size, item)
        while size > 0:
            item = _pop(heap, &size)
            cur = item.idx
            if closed[cur]:
                continue
            closed[cur] = 1
            if cur == goal:
                found = True
                break
            r = cur // cols
            c = cur % cols
            gcur = g[cur]
            for k in range(8):
                dr = NDR[k]
                dc = NDC[k]
                nr = r + dr
                nc = c + dc
                if nr < 0 or nr >= rows or nc < 0 or nc >= cols:
                    continue
                if blocked[nr, nc]:
                    continue
                if dr != 0 and dc != 0 and (blocked[r, nc] or blocked[nr, c]):
                    continue
                ni = nr * cols + nc
                if closed[ni]:
                    continue
                cost = SQRT2 if (dr != 0 and dc != 0) else 1.0
                ng = gcur + cost
                if ng < g[ni]:
                    g[ni] = ng
                    parent[ni] = cur
                    item.f = ng + _octile(nr, nc, gr, gc)
                    item.seq = seq
                    item.idx = ni
                    _push(heap, &size, item)
                    seq += 1
        if not found:
            return None
        path = []
        cur = goal
        while cur != -1:
            path.append((cur // cols, cur % cols))
            cur = parent[cur]
        path.reverse()
        return path
    finally:
        free(g)
        free(parent)
        free(closed)
        free(heap)


def line_of_sight(const unsigned char[:, ::1] blocked, double r0, double c0, double r1, double c1):
    cdef int rows = blocked.shape[0]
    cdef int cols = blocked.shape[1]
    cdef double dr = r1 - r0
    cdef double dc = c1 - c0
    cdef double dist = sqrt(dr * dr + dc * dc)
    cdef int n = <int>(dist / LOS_STEP) + 1
    cdef int i, ri, ci
    cdef double t, r, c
    for i in range(n + 1):
        t = <double>i / <double>n
        r = r0 + dr * t
        c = c0 + dc * t
        ri = <int>floor(r)
        ci = <int>floor(c)
        if ri < 0 or ri >= rows or ci < 0 or ci >= cols:
            return False
        if blocked[ri, ci]:
            return False
    return True


def inflate(occupied, double radius_cells):
    cdef const unsigned char[:, ::1] occ = np.ascontiguousarray(occupied, dtype=np.uint8)
    cdef int rows = occ.shape[0]
    cdef int cols = occ.shape[1]
    out_arr = np.array(occ, dtype=np.uint8, copy=True)
    cdef unsigned char[:, ::1] out = out_arr
    cdef double r2 = radius_cells * radius_cells
    cdef int k = <int>floor(sqrt(r2 + 1e-9))
    cdef int r, c, dr, dc, nr, nc, i, n = 0
    cdef int* offs = <int*>malloc(2 * (2 * k + 1) * (2 * k + 1) * sizeof(int))
    if offs == NULL:
        raise MemoryError()
    for dr in range(-k, k + 1):
        for dc in range(-k, k + 1):
            if dr * dr + dc * dc <= r2 + 1e-9 and (dr != 0 or dc != 0):
                offs[2 * n] = dr
                offs[2 * n + 1] = dc
                n += 1
    try:
        for r in range(rows):
            for c in range(cols):
                if not occ[r, c]:
                    continue
                if k < r < rows - k - 1 and k < c < cols - k - 1:
                    for i in range(n):
                        out[r + offs[2 * i], c + offs[2 * i + 1]] = 1
                    continue
                for i in range(n):
                    nr = r + offs[2 * i]
                    nc = c + offs[2 * i + 1]
                    if 0 <= nr < rows and 0 <= nc < cols:
                        out[nr, nc] = 1
    finally:
        free(offs)
    return out_arr


cdef enum:
    MAX_LANDMARKS = 256


cdef double _cost(double* lx, double* ly, double* ranges, int n, double x, double y):
    cdef double s = 0.0
    cdef double dx, dy, r
    cdef int i
    for i in range(n):
        dx = x - lx[i]
        dy = y - ly[i]
        r = sqrt(dx * dx + dy * dy) - ranges[i]
        s += r * r
    return s


def trilaterate(lx_in, ly_in, ranges_in, double x0, double y0, int max_iter=10, double tol=1e-6):
    cdef int n = len(ranges_in)
    if n > MAX_LANDMARKS:
        raise ValueError("too many landmarks")
    cdef double lx[MAX_LANDMARKS]
    cdef double ly[MAX_LANDMARKS]
    cdef double ranges[MAX_LANDMARKS]
    cdef int i
    for i in range(n):
        lx[i] = lx_in[i]
        ly[i] = ly_in[i]
        ranges[i] = ranges_in[i]
    cdef double x = x0
    cdef double y = y0
    cdef double prev = _cost(lx, ly, ranges, n, x, y)
    cdef int grow = 0
    cdef int it = 0
    cdef double a11, a12, a22, b1, b2, dx, dy, d, jx, jy, r, det, sx, sy, cost
    while it < max_iter:
        a11 = 0.0
        a12 = 0.0
        a22 = 0.0
        b1 = 0.0
        b2 = 0.0
        for i in range(n):
            dx = x - lx[i]
            dy = y - ly[i]
            d = sqrt(dx * dx + dy * dy)
            if d < 1e-12:
                d = 1e-12
            jx = dx / d
            jy = dy / d
            r = d - ranges[i]
            a11 += jx * jx
            a12 += jx * jy
            a22 += jy * jy
            b1 += jx * r
            b2 += jy * r
        det = a11 * a22 - a12 * a12
        if fabs(det) < 1e-12:
            return x0, y0, SINGULAR, it
        sx = -(a22 * b1 - a12 * b2) / det
        sy = -(a11 * b2 - a12 * b1) / det
        x += sx
        y += sy
        it += 1
        cost = _cost(lx, ly, ranges, n, x, y)
        if cost > prev:
            grow += 1
            if grow >= 3:
                return x0, y0, DIVERGED, it
        else:
            grow = 0
        prev = cost
        if sqrt(sx * sx + sy * sy) < tol:
            break
    return x, y, OK, it
