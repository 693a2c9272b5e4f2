"""Footprint collision checks and the cut/uncut coverage objective."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _backend
from .boundary import Boundary, RobotSpec, lower_envelope, preprocess_boundary, rasterize_obstacle
from .morphology import BinaryGrid, dilate, disk

__all__ = [
    "FootprintPose",
    "CollisionResult",
    "CoverageReport",
    "boundary_digest",
    "footprint_depths",
    "check_collision",
    "safe_height",
    "rasterize_polyline",
    "swept_region",
    "uncut_area",
]


@dataclass(frozen=True)
class FootprintPose:
    x: float
    y: float
    heading: float
    half_length: float
    half_width: float

    @classmethod
    def of(cls, x, y, heading, spec: RobotSpec) -> "FootprintPose":
        return cls(x, y, heading, spec.length / 2, spec.width / 2)

    def corners(self) -> np.ndarray:
        c, s = math.cos(self.heading), math.sin(self.heading)
        local = np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]], dtype=float)
        local *= [self.half_length, self.half_width]
        rot = np.array([[c, -s], [s, c]])
        return local @ rot.T + [self.x, self.y]


@dataclass(frozen=True)
class CollisionResult:
    depths: np.ndarray
    max_depth: float
    violations: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_depth <= self.tolerance


@dataclass(frozen=True)
class CoverageReport:
    method: str
    uncut_area: float
    cut_area: float
    path_length: float
    max_violation: float
    violations: int
    boundary: str | None = None

    def to_dict(self) -> dict:
        d = {
            "method": self.method,
            "uncut_area_m2": self.uncut_area,
            "cut_area_m2": self.cut_area,
            "path_length_m": self.path_length,
            "max_violation_m": self.max_violation,
            "violations": self.violations,
        }
        if self.boundary is not None:
            d["boundary_digest"] = self.boundary
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CoverageReport":
        return cls(
            method=str(d["method"]),
            uncut_area=float(d["uncut_area_m2"]),
            cut_area=float(d.get("cut_area_m2", 0.0)),
            path_length=float(d.get("path_length_m", 0.0)),
            max_violation=float(d.get("max_violation_m", 0.0)),
            violations=int(d.get("violations", 0)),
            boundary=d.get("boundary_digest"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def read(cls, path) -> "CoverageReport":
        return cls.from_dict(json.loads(Path(path).read_text()))


def boundary_digest(b: Boundary) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(b.xs).tobytes())
    h.update(np.ascontiguousarray(b.ys).tobytes())
    return h.hexdigest()[:16]


def _obstacle_grid(b_star: Boundary, spec: RobotSpec) -> tuple[BinaryGrid, np.ndarray]:
    res = b_star.step
    reach = spec.big_radius + 5 * res
    grid = rasterize_obstacle(b_star, res, pad_above=reach, pad_below=2 * reach, pad_x=reach)
    _, env = lower_envelope(grid)
    return grid, np.ascontiguousarray(env, dtype=np.float64)


def footprint_depths(poses, b_star: Boundary, spec: RobotSpec) -> tuple[np.ndarray, np.ndarray]:
    """Penetration depth and obstacle-cell count of the body at every pose.

    A body cell is one whose center lies inside the oriented rectangle; its
    depth is how far that center sits above the boundary at its column.
    """
    grid, env = _obstacle_grid(b_star, spec)
    poses = np.ascontiguousarray(np.asarray(poses, dtype=np.float64).reshape(-1, 3))
    return _backend.footprint_penetration(
        np.ascontiguousarray(grid.cells, dtype=np.uint8), env, grid.origin[0], grid.origin[1],
        grid.resolution, poses, spec.length / 2, spec.width / 2,
    )


def _perimeter(half_length: float, half_width: float, spacing: float) -> np.ndarray:
    nl = max(int(math.ceil(2 * half_length / spacing)), 1)
    nw = max(int(math.ceil(2 * half_width / spacing)), 1)
    u = np.linspace(-half_length, half_length, nl + 1)
    v = np.linspace(-half_width, half_width, nw + 1)
    return np.concatenate([
        np.column_stack([u, np.full_like(u, half_width)]),
        np.column_stack([u, np.full_like(u, -half_width)]),
        np.column_stack([np.full_like(v, half_length), v]),
        np.column_stack([np.full_like(v, -half_length), v]),
    ])


def safe_height(xs, heading, b_star: Boundary, spec: RobotSpec, spacing: float | None = None) -> np.ndarray:
    """Highest center y at each x whose body, turned to ``heading``, stays under the boundary.

    The body perimeter is sampled every ``spacing`` meters (default half a
    boundary step); the boundary is held constant past its ends.
    """
    xs = np.asarray(xs, dtype=float)
    heading = np.asarray(heading, dtype=float)
    if spacing is None:
        spacing = b_star.step / 2
    pts = _perimeter(spec.length / 2, spec.width / 2, spacing)
    c = np.cos(heading)[:, None]
    s = np.sin(heading)[:, None]
    ox = pts[None, :, 0] * c - pts[None, :, 1] * s
    oy = pts[None, :, 0] * s + pts[None, :, 1] * c
    return np.min(b_star(xs[:, None] + ox) - oy, axis=1)


def check_collision(p, b_star: Boundary, spec: RobotSpec, tolerance: float = 0.02) -> CollisionResult:
    """Footprint check of every pose of ``p`` against the preprocessed boundary."""
    lo = b_star.xs[0] - spec.big_radius
    hi = b_star.xs[-1] + spec.big_radius
    if p.xs[0] < lo or p.xs[-1] > hi:
        raise ValueError("path extends outside the boundary's grid")
    depths, counts = footprint_depths(p.poses, b_star, spec)
    return CollisionResult(depths, float(depths.max(initial=0.0)), int(np.count_nonzero(counts)), tolerance)


def rasterize_polyline(grid: BinaryGrid, xs, ys) -> BinaryGrid:
    """Cells nearest to points sampled every quarter cell along the polyline."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    res = grid.resolution
    pts = [np.column_stack([xs[:1], ys[:1]])]
    for (xa, ya, xb, yb) in zip(xs[:-1], ys[:-1], xs[1:], ys[1:]):
        n = max(int(math.ceil(math.hypot(xb - xa, yb - ya) / (res / 4))), 1)
        t = np.arange(1, n + 1) / n
        pts.append(np.column_stack([xa + t * (xb - xa), ya + t * (yb - ya)]))
    pts = np.concatenate(pts)
    cols = np.rint((pts[:, 0] - grid.origin[0]) / res).astype(np.int64)
    rows = np.rint((pts[:, 1] - grid.origin[1]) / res).astype(np.int64)
    ok = (cols >= 0) & (cols < grid.width) & (rows >= 0) & (rows < grid.height)
    cells = np.zeros((grid.height, grid.width), dtype=bool)
    cells[rows[ok], cols[ok]] = True
    return grid.with_cells(cells)


def _grid_around(xs, ys, margin: float, res: float) -> BinaryGrid:
    # cell centers on half-cell coordinates, as in the obstacle raster
    x0 = (math.floor((min(xs) - margin) / res) + 0.5) * res
    y0 = (math.floor((min(ys) - margin) / res) + 0.5) * res
    w = int(math.ceil((max(xs) + margin - x0) / res)) + 1
    h = int(math.ceil((max(ys) + margin - y0) / res)) + 1
    return BinaryGrid(np.zeros((h, w), dtype=bool), res, (x0, y0))


def swept_region(p, spec: RobotSpec, grid: BinaryGrid | None = None,
                 resolution: float | None = None) -> BinaryGrid:
    """Cells mowed by the deck: centers within the mowing radius of the path.

    The rasterized path dilated by a disk one cell wider than the deck gives
    every candidate; each candidate is then kept iff its center lies within
    R3 of the path polyline.  With R3 = 0 the rasterized path is returned.
    Without ``grid`` a fresh grid around the path is used, at ``resolution``
    (default: the path's x step).
    """
    if grid is None:
        if resolution is None:
            resolution = float(np.median(np.diff(p.xs))) if len(p) > 1 else 0.01
        grid = _grid_around(p.xs, p.ys, spec.mow_radius + 3 * resolution, resolution)
    trace = rasterize_polyline(grid, p.xs, p.ys)
    if spec.mow_radius <= 0:
        return trace
    res = grid.resolution
    candidates = dilate(trace, disk(spec.mow_radius + res, res))
    cells = _backend.swept_refine(
        np.ascontiguousarray(candidates.cells, dtype=np.uint8), grid.origin[0], grid.origin[1], res,
        np.ascontiguousarray(p.xs, dtype=np.float64), np.ascontiguousarray(p.ys, dtype=np.float64),
        float(spec.mow_radius),
    )
    return grid.with_cells(np.asarray(cells, dtype=bool))


def uncut_area(p, b_raw: Boundary, spec: RobotSpec, *, b_star: Boundary | None = None,
               tolerance: float = 0.02) -> CoverageReport:
    """Cut and uncut lawn between the path and the raw boundary.

    Per column, the edge strip holds the lawn cells from the path's height up
    to the raw boundary; cells of the strip inside the swept region are cut,
    the rest uncut.  Collision figures are taken against ``b_star`` (the
    preprocessed boundary, computed when omitted).
    """
    res = b_raw.step
    gap = float(np.max(b_raw(p.xs) - p.ys))
    below = max(float(b_raw.ys.min() - np.min(p.ys)), 0.0) + spec.mow_radius + 5 * res
    grid = rasterize_obstacle(b_raw, res, pad_above=5 * res, pad_below=below)
    cols = (grid.xs >= p.xs[0] - 1e-9) & (grid.xs <= p.xs[-1] + 1e-9)
    y_path = np.interp(grid.xs, p.xs, p.ys)
    if np.any(y_path[cols] >= b_raw(grid.xs[cols])) or gap <= 0:
        raise ValueError("path reaches the boundary or the obstacle")
    lawn = ~grid.cells
    strip = lawn & (grid.ys[:, None] >= y_path[None, :]) & cols[None, :]
    swept = swept_region(p, spec, grid=grid).cells
    cut = int(np.count_nonzero(strip & swept))
    uncut = int(np.count_nonzero(strip & ~swept))
    if b_star is None:
        b_star = preprocess_boundary(b_raw, spec)
    col = check_collision(p, b_star, spec, tolerance)
    return CoverageReport(
        method=p.method,
        uncut_area=uncut * res * res,
        cut_area=cut * res * res,
        path_length=p.length(),
        max_violation=col.max_depth,
        violations=col.violations,
        boundary=boundary_digest(b_raw),
    )
