"""Plain-text occupancy maps.

Each character is a 0.5 m macro-cell: ``#`` wall, ``.`` free, ``L`` a wall
cell carrying a landmark at its center. The map is centered on the world
origin and refined to 0.1 m cells; row 0 is the top (largest y) row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

MACRO = 0.5
RESOLUTION = 0.1
REFINE = 5  # fine cells per macro-cell edge
DEFAULT_MAP = "maze"


class MapError(ValueError):
    pass


@dataclass
class GridMap:
    name: str
    walls: np.ndarray  # uint8, 1 = wall
    landmarks: list[tuple[float, float]]
    x_min: float
    y_max: float
    resolution: float = RESOLUTION

    @property
    def rows(self) -> int:
        return self.walls.shape[0]

    @property
    def cols(self) -> int:
        return self.walls.shape[1]

    @property
    def x_max(self) -> float:
        return self.x_min + self.cols * self.resolution

    @property
    def y_min(self) -> float:
        return self.y_max - self.rows * self.resolution

    def frac_cell(self, x: float, y: float) -> tuple[float, float]:
        return (self.y_max - y) / self.resolution, (x - self.x_min) / self.resolution

    def cell(self, x: float, y: float) -> tuple[int, int]:
        r, c = self.frac_cell(x, y)
        return int(math.floor(r)), int(math.floor(c))

    def cell_center(self, r: int, c: int) -> tuple[float, float]:
        return self.x_min + (c + 0.5) * self.resolution, self.y_max - (r + 0.5) * self.resolution

    def in_bounds(self, x: float, y: float) -> bool:
        return self.x_min <= x < self.x_max and self.y_min < y <= self.y_max

    def is_wall(self, x: float, y: float) -> bool:
        if not self.in_bounds(x, y):
            return True
        r, c = self.cell(x, y)
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            return True
        return bool(self.walls[r, c])


def parse_map(text: str, name: str = "<map>") -> GridMap:
    lines = [ln.rstrip("\r") for ln in text.splitlines()]
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise MapError(f"{name}: map is empty")
    width = len(lines[0])
    for i, ln in enumerate(lines, 1):
        if len(ln) != width:
            raise MapError(f"{name}:{i}: row has {len(ln)} cells, expected {width}")
        bad = set(ln) - {"#", ".", "L"}
        if bad:
            raise MapError(f"{name}:{i}: unknown map character {sorted(bad)[0]!r}")
    rows, cols = len(lines), width
    x_min = -cols * MACRO / 2.0
    y_max = rows * MACRO / 2.0
    macro = np.array([[ch != "." for ch in ln] for ln in lines], dtype=np.uint8)
    walls = np.ascontiguousarray(np.kron(macro, np.ones((REFINE, REFINE), dtype=np.uint8)))
    landmarks = [
        (x_min + (c + 0.5) * MACRO, y_max - (r + 0.5) * MACRO)
        for r, ln in enumerate(lines)
        for c, ch in enumerate(ln)
        if ch == "L"
    ]
    return GridMap(name, walls, landmarks, x_min, y_max)


def load_map(path: str | Path | None = None) -> GridMap:
    """Load a map file, or a bundled map by name (``maze``, ``empty``)."""
    if path is None:
        path = DEFAULT_MAP
    p = Path(path)
    if p.is_file():
        return parse_map(p.read_text(encoding="utf-8"), str(p))
    bundled = resources.files("scenrun.sim") / "maps" / f"{path}.txt"
    if bundled.is_file():
        return parse_map(bundled.read_text(encoding="utf-8"), str(path))
    raise MapError(f"map file not found: {path}")
