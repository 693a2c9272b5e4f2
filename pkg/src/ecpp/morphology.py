"""Binary morphology on rasterized workspace grids.

Grids are dense boolean arrays indexed ``cells[row, col]``; row 0 is the
bottom of the workspace (smallest y) and ``origin`` is the world position of
the center of cell ``(0, 0)``.  Structuring elements are sets of integer
``(dx, dy)`` cell offsets anchored at ``(0, 0)``.

Cells outside the grid count as background for every operation.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _backend

__all__ = [
    "BinaryGrid",
    "StructuringElement",
    "disk",
    "reflect",
    "translate",
    "dilate",
    "erode",
    "opening",
    "closing",
    "write_pgm",
    "read_pgm",
]


@dataclass(frozen=True, eq=False)
class BinaryGrid:
    cells: np.ndarray
    resolution: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        cells = np.array(self.cells, dtype=bool, copy=True)
        if cells.ndim != 2 or cells.shape[0] < 1 or cells.shape[1] < 1:
            raise ValueError(f"grid must be a non-empty 2D array, got shape {cells.shape}")
        if not self.resolution > 0:
            raise ValueError(f"resolution must be positive, got {self.resolution}")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def xs(self) -> np.ndarray:
        """World x of every column center."""
        return self.origin[0] + np.arange(self.width) * self.resolution

    @property
    def ys(self) -> np.ndarray:
        """World y of every row center."""
        return self.origin[1] + np.arange(self.height) * self.resolution

    def world(self, col: int, row: int) -> tuple[float, float]:
        return (self.origin[0] + col * self.resolution, self.origin[1] + row * self.resolution)

    def cell(self, x: float, y: float) -> tuple[int, int]:
        return (
            int(round((x - self.origin[0]) / self.resolution)),
            int(round((y - self.origin[1]) / self.resolution)),
        )

    def with_cells(self, cells: np.ndarray) -> "BinaryGrid":
        return BinaryGrid(cells, self.resolution, self.origin)

    def complement(self) -> "BinaryGrid":
        return self.with_cells(~self.cells)

    def area(self) -> float:
        return float(self.cells.sum()) * self.resolution**2

    def __eq__(self, other):
        if not isinstance(other, BinaryGrid):
            return NotImplemented
        return (
            self.resolution == other.resolution
            and self.origin == other.origin
            and np.array_equal(self.cells, other.cells)
        )

    def __repr__(self):
        return (
            f"BinaryGrid({self.width}x{self.height}, res={self.resolution}, "
            f"origin={self.origin}, fg={int(self.cells.sum())})"
        )


@dataclass(frozen=True)
class StructuringElement:
    offsets: frozenset
    radius: float | None = field(default=None, compare=False)

    def __post_init__(self):
        offs = frozenset((int(dx), int(dy)) for dx, dy in self.offsets)
        object.__setattr__(self, "offsets", offs)

    def __len__(self):
        return len(self.offsets)

    def __contains__(self, item):
        return tuple(item) in self.offsets

    def runs(self) -> np.ndarray:
        """Decompose into horizontal runs ``(dy, lo, hi)`` for the kernels."""
        by_row: dict[int, list[int]] = {}
        for dx, dy in self.offsets:
            by_row.setdefault(dy, []).append(dx)
        runs = []
        for dy in sorted(by_row):
            dxs = sorted(by_row[dy])
            start = prev = dxs[0]
            for dx in dxs[1:]:
                if dx != prev + 1:
                    runs.append((dy, start, prev))
                    start = dx
                prev = dx
            runs.append((dy, start, prev))
        return np.array(runs, dtype=np.int64).reshape(-1, 3)

    def extent(self) -> int:
        """Largest |dx| or |dy| among the offsets."""
        if not self.offsets:
            return 0
        return max(max(abs(dx), abs(dy)) for dx, dy in self.offsets)


def disk(radius: float, resolution: float) -> StructuringElement:
    """Disk of metric ``radius``: offsets whose center lies within the radius."""
    if radius < 0:
        raise ValueError(f"disk radius must be non-negative, got {radius}")
    if not resolution > 0:
        raise ValueError(f"resolution must be positive, got {resolution}")
    rc = radius / resolution
    # small slack so radii that are exact multiples of the cell size survive float division
    r2 = rc * rc * (1 + 1e-12)
    n = int(math.floor(rc + 1e-9))
    offs = [
        (dx, dy)
        for dy in range(-n, n + 1)
        for dx in range(-n, n + 1)
        if dx * dx + dy * dy <= r2
    ]
    return StructuringElement(frozenset(offs), radius=radius)


def reflect(se: StructuringElement) -> StructuringElement:
    return StructuringElement(frozenset((-dx, -dy) for dx, dy in se.offsets), radius=se.radius)


def translate(se: StructuringElement, z: tuple[int, int]) -> StructuringElement:
    zx, zy = int(z[0]), int(z[1])
    return StructuringElement(frozenset((dx + zx, dy + zy) for dx, dy in se.offsets))


def _as_u8(grid: BinaryGrid) -> np.ndarray:
    return np.ascontiguousarray(grid.cells, dtype=np.uint8)


def dilate(grid: BinaryGrid, se: StructuringElement) -> BinaryGrid:
    """Cells z where the reflected element translated to z hits the foreground."""
    if not se.offsets:
        return grid.with_cells(np.zeros_like(grid.cells))
    out = _backend.dilate_runs(_as_u8(grid), se.runs())
    return grid.with_cells(np.asarray(out, dtype=bool))


def erode(grid: BinaryGrid, se: StructuringElement) -> BinaryGrid:
    """Cells z where the element translated to z lies inside the foreground."""
    if not se.offsets:
        return grid.with_cells(np.ones_like(grid.cells))
    out = _backend.erode_runs(_as_u8(grid), se.runs())
    return grid.with_cells(np.asarray(out, dtype=bool))


def opening(grid: BinaryGrid, se: StructuringElement) -> BinaryGrid:
    return dilate(erode(grid, se), se)


def closing(grid: BinaryGrid, se: StructuringElement) -> BinaryGrid:
    return erode(dilate(grid, se), se)


_META = re.compile(r"#\s*ecpp\s+resolution=(\S+)\s+origin=(\S+),(\S+)")


def write_pgm(grid: BinaryGrid, path) -> None:
    """Binary PGM (P5); top image row is the top of the workspace."""
    img = np.where(grid.cells[::-1], 255, 0).astype(np.uint8)
    header = (
        f"P5\n# ecpp resolution={grid.resolution!r} origin={grid.origin[0]!r},{grid.origin[1]!r}\n"
        f"{grid.width} {grid.height}\n255\n"
    )
    Path(path).write_bytes(header.encode("ascii") + img.tobytes())


def read_pgm(path, resolution: float | None = None, origin=None) -> BinaryGrid:
    data = Path(path).read_bytes()
    tokens: list[bytes] = []
    meta = None
    pos = 0
    while len(tokens) < 4:
        while data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            end = data.index(b"\n", pos)
            m = _META.match(data[pos:end].decode("ascii", "replace"))
            if m:
                meta = (float(m.group(1)), (float(m.group(2)), float(m.group(3))))
            pos = end + 1
            continue
        end = pos
        while not data[end : end + 1].isspace():
            end += 1
        tokens.append(data[pos:end])
        pos = end
    if tokens[0] != b"P5":
        raise ValueError(f"not a binary PGM: magic {tokens[0]!r}")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval > 255:
        raise ValueError("16-bit PGM is not supported")
    pos += 1
    img = np.frombuffer(data[pos : pos + width * height], dtype=np.uint8).reshape(height, width)
    if resolution is None:
        resolution = meta[0] if meta else 1.0
    if origin is None:
        origin = meta[1] if meta else (0.0, 0.0)
    return BinaryGrid(img[::-1] > 0, resolution, origin)
