"""Pure-Python kernels; reference twin of ``_kernels.pyx``.

Both implementations perform the same floating-point operations in the same
order so their results are bit-identical.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

SQRT2 = 1.4142135623730951
LOS_STEP = 0.25

OK, DIVERGED, SINGULAR = 0, 1, 2

# (dr, dc, cost) in fixed expansion order
_NEIGHBORS = (
    (-1, 0, 1.0), (1, 0, 1.0), (0, -1, 1.0), (0, 1, 1.0),
    (-1, -1, SQRT2), (-1, 1, SQRT2), (1, -1, SQRT2), (1, 1, SQRT2),
)


def _octile(r: int, c: int, gr: int, gc: int) -> float:
    dr = abs(r - gr)
    dc = abs(c - gc)
    mn = min(dr, dc)
    mx = max(dr, dc)
    return float(mx - mn) + SQRT2 * float(mn)


def astar(blocked: np.ndarray, sr: int, sc: int, gr: int, gc: int):
    """8-connected A* without corner cutting. The start cell is never
    tested for occupancy. Returns a list of (row, col) or None."""
    rows, cols = blocked.shape
    if not (0 <= gr < rows and 0 <= gc < cols and 0 <= sr < rows and 0 <= sc < cols):
        return None
    if blocked[gr, gc]:
        return None
    grid = blocked.tolist()
    n = rows * cols
    inf = math.inf
    g = [inf] * n
    parent = [-1] * n
    closed = bytearray(n)
    start = sr * cols + sc
    goal = gr * cols + gc
    g[start] = 0.0
    heap = [(_octile(sr, sc, gr, gc), 0, start)]
    seq = 1
    while heap:
        _, _, cur = heapq.heappop(heap)
        if closed[cur]:
            continue
        closed[cur] = 1
        if cur == goal:
            path = []
            while cur != -1:
                path.append(divmod(cur, cols))
                cur = parent[cur]
            path.reverse()
            return path
        r, c = divmod(cur, cols)
        gcur = g[cur]
        for dr, dc, cost in _NEIGHBORS:
            nr = r + dr
            nc = c + dc
            if nr < 0 or nr >= rows or nc < 0 or nc >= cols:
                continue
            if grid[nr][nc]:
                continue
            if dr != 0 and dc != 0 and (grid[r][nc] or grid[nr][c]):
                continue
            ni = nr * cols + nc
            if closed[ni]:
                continue
            ng = gcur + cost
            if ng < g[ni]:
                g[ni] = ng
                parent[ni] = cur
                heapq.heappush(heap, (ng + _octile(nr, nc, gr, gc), seq, ni))
                seq += 1
    return None


def line_of_sight(blocked: np.ndarray, r0: float, c0: float, r1: float, c1: float) -> bool:
    """Sample the segment (in fractional cell coordinates) every quarter cell."""
    rows, cols = blocked.shape
    dr = r1 - r0
    dc = c1 - c0
    dist = math.sqrt(dr * dr + dc * dc)
    n = int(dist / LOS_STEP) + 1
    for i in range(n + 1):
        t = i / n
        r = r0 + dr * t
        c = c0 + dc * t
        ri = int(math.floor(r))
        ci = int(math.floor(c))
        if ri < 0 or ri >= rows or ci < 0 or ci >= cols:
            return False
        if blocked[ri, ci]:
            return False
    return True


def disk_offsets(radius_cells: float) -> list[tuple[int, int]]:
    r2 = radius_cells * radius_cells
    k = int(math.floor(math.sqrt(r2 + 1e-9)))
    return [(dr, dc) for dr in range(-k, k + 1) for dc in range(-k, k + 1) if dr * dr + dc * dc <= r2 + 1e-9]


def inflate(occupied: np.ndarray, radius_cells: float) -> np.ndarray:
    """Mark every cell whose center lies within ``radius_cells`` of an
    occupied cell center."""
    occ = np.ascontiguousarray(occupied, dtype=np.uint8)
    rows, cols = occ.shape
    out = occ.copy()
    for dr, dc in disk_offsets(radius_cells):
        if abs(dr) >= rows or abs(dc) >= cols:
            continue
        src = occ[max(0, -dr):rows - max(0, dr), max(0, -dc):cols - max(0, dc)]
        dst = out[max(0, dr):rows - max(0, -dr), max(0, dc):cols - max(0, -dc)]
        np.bitwise_or(dst, src, out=dst)
    return out


def _cost(lx, ly, ranges, x: float, y: float) -> float:
    s = 0.0
    for i in range(len(ranges)):
        dx = x - lx[i]
        dy = y - ly[i]
        r = math.sqrt(dx * dx + dy * dy) - ranges[i]
        s += r * r
    return s


def trilaterate(lx, ly, ranges, x0: float, y0: float, max_iter: int = 10, tol: float = 1e-6):
    """Gauss-Newton on range residuals ``|p - l_i| - r_i``.

    Returns ``(x, y, status, iterations)``; on divergence (cost growing three
    iterations running) or a singular normal matrix the start point is returned
    with a non-zero status.
    """
    x = x0
    y = y0
    prev = _cost(lx, ly, ranges, x, y)
    grow = 0
    it = 0
    while it < max_iter:
        a11 = 0.0
        a12 = 0.0
        a22 = 0.0
        b1 = 0.0
        b2 = 0.0
        for i in range(len(ranges)):
            dx = x - lx[i]
            dy = y - ly[i]
            d = math.sqrt(dx * dx + dy * dy)
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
        if abs(det) < 1e-12:
            return x0, y0, SINGULAR, it
        sx = -(a22 * b1 - a12 * b2) / det
        sy = -(a11 * b2 - a12 * b1) / det
        x += sx
        y += sy
        it += 1
        cost = _cost(lx, ly, ranges, x, y)
        if cost > prev:
            grow += 1
            if grow >= 3:
                return x0, y0, DIVERGED, it
        else:
            grow = 0
        prev = cost
        if math.sqrt(sx * sx + sy * sy) < tol:
            break
    return x, y, OK, it
