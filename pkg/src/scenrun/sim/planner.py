"""Grid path planning over an inflated occupancy grid."""

from __future__ import annotations

import numpy as np

from . import kernels
from .maps import GridMap

ROBOT_RADIUS = 0.2


def inflate_grid(occupied: np.ndarray, grid: GridMap, radius: float = ROBOT_RADIUS) -> np.ndarray:
    return np.ascontiguousarray(kernels.inflate(occupied, radius / grid.resolution), dtype=np.uint8)


def segment_clear(grid: GridMap, blocked: np.ndarray, a: tuple[float, float], b: tuple[float, float]) -> bool:
    r0, c0 = grid.frac_cell(*a)
    r1, c1 = grid.frac_cell(*b)
    return bool(kernels.line_of_sight(blocked, r0, c0, r1, c1))


def shortcut(grid: GridMap, blocked: np.ndarray, points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Greedy line-of-sight simplification: from each kept point jump to the
    farthest later point that is visible."""
    out = [points[0]]
    i = 0
    n = len(points)
    while i < n - 1:
        j = n - 1
        while j > i + 1 and not segment_clear(grid, blocked, points[i], points[j]):
            j -= 1
        out.append(points[j])
        i = j
    return out


def plan_path(
    grid: GridMap,
    blocked: np.ndarray,
    start: tuple[float, float],
    goal: tuple[float, float],
) -> list[tuple[float, float]] | None:
    """Waypoints from ``start`` to ``goal`` (both included), or None when
    the goal is unreachable. ``blocked`` is the inflated grid."""
    if not (grid.in_bounds(*start) and grid.in_bounds(*goal)):
        return None
    sr, sc = grid.cell(*start)
    gr, gc = grid.cell(*goal)
    cells = kernels.astar(blocked, sr, sc, gr, gc)
    if cells is None:
        return None
    points = [start] + [grid.cell_center(r, c) for r, c in cells[1:-1]] + [goal]
    if len(cells) == 1:
        points = [start, goal]
    return shortcut(grid, blocked, points)


def path_clear(grid: GridMap, blocked: np.ndarray, path: list[tuple[float, float]]) -> bool:
    return all(segment_clear(grid, blocked, a, b) for a, b in zip(path, path[1:]))
