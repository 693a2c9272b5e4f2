"""Function-graph lawn boundaries, robot geometry and boundary preprocessing.

A boundary is the curve ``y = f(x)``; the obstacle occupies ``y >= f(x)``
and the lawn lies below it.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .morphology import BinaryGrid, closing, dilate, disk

__all__ = [
    "Boundary",
    "RobotSpec",
    "ConvexityProfile",
    "PreprocessStages",
    "generate_boundary",
    "rasterize_obstacle",
    "workspace_grid",
    "lower_envelope",
    "preprocess_boundary",
    "preprocess_stages",
    "convexity",
    "read_boundary_csv",
    "write_boundary_csv",
]


@dataclass(frozen=True, eq=False)
class Boundary:
    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.array(self.xs, dtype=np.float64, copy=True).ravel()
        ys = np.array(self.ys, dtype=np.float64, copy=True).ravel()
        if xs.shape != ys.shape:
            raise ValueError(f"xs and ys differ in length: {xs.size} vs {ys.size}")
        if xs.size < 2:
            raise ValueError("a boundary needs at least 2 samples")
        if not np.all(np.isfinite(xs)) or not np.all(np.isfinite(ys)):
            raise ValueError("boundary samples must be finite")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("boundary xs must be strictly increasing")
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    def __len__(self):
        return self.xs.size

    def __call__(self, x):
        """Linear interpolation, held constant past either end."""
        return np.interp(x, self.xs, self.ys)

    @property
    def span(self) -> float:
        return float(self.xs[-1] - self.xs[0])

    @property
    def step(self) -> float:
        return self.span / (self.xs.size - 1)

    def is_uniform(self, rtol: float = 1e-6) -> bool:
        d = np.diff(self.xs)
        return bool(np.all(np.abs(d - self.step) <= rtol * self.step))

    def __eq__(self, other):
        if not isinstance(other, Boundary):
            return NotImplemented
        return np.array_equal(self.xs, other.xs) and np.array_equal(self.ys, other.ys)


@dataclass(frozen=True)
class RobotSpec:
    length: float
    width: float
    mow_radius: float

    def __post_init__(self):
        if not (self.length > 0 and self.width > 0):
            raise ValueError(f"robot length and width must be positive: l={self.length}, w={self.width}")
        if not (0 < self.mow_radius <= self.small_radius):
            raise ValueError(
                f"mowing radius must satisfy 0 < R3 <= w/2 = {self.small_radius}, got {self.mow_radius}"
            )

    @property
    def big_radius(self) -> float:
        """Circumcircle of the body (R1)."""
        return math.hypot(self.length / 2, self.width / 2)

    @property
    def small_radius(self) -> float:
        """Inscribed circle of the body (R2)."""
        return self.width / 2


@dataclass(frozen=True, eq=False)
class ConvexityProfile:
    xs: np.ndarray
    ydot: np.ndarray
    yddot: np.ndarray
    convex: np.ndarray

    @property
    def labels(self) -> list[str]:
        return ["convex" if c else "concave" for c in self.convex]


def _uniform_xs(span: float, step: float, x0: float) -> np.ndarray:
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    if not span > 0:
        raise ValueError(f"span must be positive, got {span}")
    n = int(round(span / step)) + 1
    if n < 2:
        raise ValueError("span/step yields fewer than 2 samples")
    return x0 + np.arange(n) * step


def _triangle(x, amplitude, period, phase):
    t = (x / period + phase / (2 * np.pi)) % 1.0
    return amplitude * (1 - 4 * np.abs(t - 0.5))


def generate_boundary(kind: str, params: dict | None = None, span: float = 10.0,
                      step: float = 0.01) -> Boundary:
    """Sample an analytic boundary on a uniform grid.

    Kinds and their ``params``:

    * ``flat``: ``offset``
    * ``sine``: ``offset, amplitude, period, phase``
    * ``composite-sine``: ``offset`` and ``components``, a list of
      ``{amplitude, period, phase}``
    * ``triangle``: same keys as ``sine``, piecewise-linear wave
    * ``samples``: explicit ``xs`` and ``ys`` (span/step ignored)

    All kinds accept ``x0`` (default 0).
    """
    p = dict(params or {})
    if kind == "samples":
        return Boundary(p["xs"], p["ys"])
    xs = _uniform_xs(span, step, float(p.get("x0", 0.0)))
    offset = float(p.get("offset", 0.0))
    if kind == "flat":
        ys = np.full_like(xs, offset)
    elif kind == "sine":
        ys = offset + float(p.get("amplitude", 0.0)) * np.sin(
            2 * np.pi * xs / float(p.get("period", 1.0)) + float(p.get("phase", 0.0))
        )
    elif kind == "triangle":
        ys = offset + _triangle(xs, float(p.get("amplitude", 0.0)), float(p.get("period", 1.0)),
                                float(p.get("phase", 0.0)))
    elif kind == "composite-sine":
        ys = np.full_like(xs, offset)
        for comp in p.get("components", []):
            ys = ys + float(comp["amplitude"]) * np.sin(
                2 * np.pi * xs / float(comp["period"]) + float(comp.get("phase", 0.0))
            )
    else:
        raise ValueError(f"unknown boundary kind {kind!r}")
    return Boundary(xs, ys)


def _fold(b: Boundary, x: np.ndarray) -> np.ndarray:
    """Map x into the sampled range by even reflection at both ends."""
    t = np.mod(x - b.xs[0], 2 * b.span)
    return b.xs[0] + np.where(t > b.span, 2 * b.span - t, t)


def rasterize_obstacle(b: Boundary, resolution: float, pad_above: float = 0.5,
                       pad_below: float = 1.0, pad_x: float = 0.0, mirror: bool = False) -> BinaryGrid:
    """Obstacle raster: a cell is foreground iff its center lies on or above f.

    Columns are centered on the boundary's x samples (subdivided when the
    boundary step is a multiple of ``resolution``); rows are centered on
    half-cell heights so that integer-cell boundary heights never tie.
    ``pad_x`` adds columns past both ends, where f is held constant, or
    mirrored about the end samples with ``mirror``.
    """
    if not resolution > 0:
        raise ValueError(f"resolution must be positive, got {resolution}")
    if not b.is_uniform():
        raise ValueError("boundary samples must be uniformly spaced to rasterize")
    ratio = b.step / resolution
    k = int(round(ratio))
    if k < 1 or abs(ratio - k) > 1e-6:
        raise ValueError(
            f"resolution {resolution} does not evenly divide boundary step {b.step}"
        )
    pad_cols = int(math.ceil(pad_x / resolution - 1e-9))
    ncols = (b.xs.size - 1) * k + 1 + 2 * pad_cols
    x0 = b.xs[0] - pad_cols * resolution
    xc = x0 + np.arange(ncols) * resolution
    fx = b(_fold(b, xc)) if mirror else b(xc)
    y_lo = math.floor((float(b.ys.min()) - pad_below) / resolution) * resolution
    y_hi = math.ceil((float(b.ys.max()) + pad_above) / resolution) * resolution
    nrows = max(int(round((y_hi - y_lo) / resolution)), 1)
    yc = y_lo + (np.arange(nrows) + 0.5) * resolution
    cells = yc[:, None] >= fx[None, :]
    return BinaryGrid(cells, resolution, (x0, y_lo + 0.5 * resolution))


def workspace_grid(b: Boundary, spec: RobotSpec, resolution: float | None = None) -> BinaryGrid:
    """Obstacle raster padded for closing with the big disk.

    Past the ends the boundary is mirrored, over ``2·R1`` so that closing
    near the ends sees a symmetric neighbourhood; this makes preprocessing
    idempotent right up to the end samples.
    """
    res = b.step if resolution is None else resolution
    r1 = spec.big_radius
    margin = 5 * res
    return rasterize_obstacle(b, res, pad_above=r1 + margin, pad_below=2 * r1 + margin,
                              pad_x=2 * r1 + margin, mirror=True)


def lower_envelope(grid: BinaryGrid) -> tuple[np.ndarray, np.ndarray]:
    """Per column, the lower edge of the lowest foreground cell (NaN if empty)."""
    cells = grid.cells
    has = cells.any(axis=0)
    first = np.argmax(cells, axis=0)
    ys = grid.origin[1] + (first - 0.5) * grid.resolution
    ys = np.where(has, ys, np.nan)
    return grid.xs, ys


def _crop(grid: BinaryGrid, ys: np.ndarray, b: Boundary):
    """Keep the columns lying inside the boundary's x-range."""
    res = grid.resolution
    start = int(round((b.xs[0] - grid.origin[0]) / res))
    n = int(round(b.span / res)) + 1
    return b.xs[0] + np.arange(n) * res, ys[start : start + n]


@dataclass(frozen=True)
class PreprocessStages:
    raw: BinaryGrid
    dilated: BinaryGrid
    closed: BinaryGrid
    boundary: Boundary


def preprocess_stages(b: Boundary, spec: RobotSpec, resolution: float | None = None) -> PreprocessStages:
    grid = workspace_grid(b, spec, resolution)
    se = disk(spec.big_radius, grid.resolution)
    dilated = dilate(grid, se)
    closed = closing(grid, se)
    runs = np.count_nonzero(np.diff(closed.cells.astype(np.int8), axis=0) != 0, axis=0)
    runs += closed.cells[0].astype(int)
    # a function-graph obstacle must stay a single vertical run per column
    if np.any(runs > 2):
        raise RuntimeError("closing produced a non-function lower envelope")
    _, ys = lower_envelope(closed)
    xs, ys = _crop(closed, ys, b)
    if not np.all(np.isfinite(ys)):
        raise RuntimeError("closing left an empty column")
    return PreprocessStages(grid, dilated, closed, Boundary(xs, ys))


def preprocess_boundary(b: Boundary, spec: RobotSpec, resolution: float | None = None) -> Boundary:
    """Close the obstacle with the big disk and return its lower envelope.

    Narrow lawn pockets the circumcircle cannot enter are filled, so the
    result never lies above the input.
    """
    return preprocess_stages(b, spec, resolution).boundary


def _moving_average(a: np.ndarray, window: int) -> np.ndarray:
    # symmetric window that shrinks near the ends; preserves linear trends exactly
    half = window // 2
    n = a.size
    if half == 0:
        return a.copy()
    c = np.concatenate(([0.0], np.cumsum(a)))
    i = np.arange(n)
    hw = np.minimum(np.minimum(i, n - 1 - i), half)
    return (c[i + hw + 1] - c[i - hw]) / (2 * hw + 1)


def convexity(b: Boundary, smooth_window: int = 11, threshold: float = 0.0) -> ConvexityProfile:
    """First/second derivatives of the boundary and convex/concave labels.

    A sample is convex (obstacle bulging into the lawn) iff the smoothed
    second derivative exceeds ``threshold``.
    """
    n = len(b)
    if n < 5:
        raise ValueError("convexity needs at least 5 samples")
    if smooth_window < 1 or smooth_window > n:
        raise ValueError(f"smooth window {smooth_window} outside [1, {n}]")
    ydot = _moving_average(np.gradient(b.ys, b.xs, edge_order=2), smooth_window)
    yddot = _moving_average(np.gradient(ydot, b.xs, edge_order=2), smooth_window)
    yddot[np.abs(yddot) < 1e-9] = 0.0
    return ConvexityProfile(b.xs.copy(), ydot, yddot, yddot > threshold)


def read_boundary_csv(path) -> Boundary:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["x", "y"]:
            raise ValueError(f"{path}: expected header 'x,y', got {reader.fieldnames}")
        rows = [(float(r["x"]), float(r["y"])) for r in reader]
    if len(rows) < 2:
        raise ValueError(f"{path}: a boundary needs at least 2 samples")
    xs, ys = zip(*rows)
    return Boundary(xs, ys)


def write_boundary_csv(b: Boundary, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        fh.write("x,y\n")
        for x, y in zip(b.xs, b.ys):
            fh.write(f"{float(x)!r},{float(y)!r}\n")
