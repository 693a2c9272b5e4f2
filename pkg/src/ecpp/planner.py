"""Edge-following planners.

``big``, ``small`` and ``mow`` roll a disk of the matching radius along the
preprocessed boundary; ``bsdp`` switches between the small- and big-disk
paths on boundary convexity; ``scp`` slides the robot's side along the
boundary as a chord of robot length and keeps the lower of that and the
small-disk path.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import UnivariateSpline
from scipy.ndimage import maximum_filter1d, uniform_filter1d

from .boundary import Boundary, RobotSpec, convexity, lower_envelope, preprocess_boundary, rasterize_obstacle
from .morphology import dilate, disk
from . import sweep

log = logging.getLogger(__name__)

METHODS = ("big", "small", "mow", "bsdp", "scp")

__all__ = [
    "METHODS",
    "PlannedPath",
    "headings",
    "plan_disk",
    "plan_reference",
    "plan_bsdp",
    "plan_scp",
    "slide_centers",
    "smooth_path",
    "plan",
    "read_path_csv",
    "write_path_csv",
]


def headings(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Tangent direction of the sampled curve at every sample."""
    if xs.size < 2:
        return np.zeros_like(xs)
    return np.arctan2(np.gradient(ys, xs), np.ones_like(xs))


@dataclass(frozen=True, eq=False)
class PlannedPath:
    xs: np.ndarray
    ys: np.ndarray
    heading: np.ndarray
    method: str
    smoothed: bool = False
    diagnostics: tuple = field(default=(), compare=False)

    def __post_init__(self):
        xs = np.array(self.xs, dtype=np.float64, copy=True).ravel()
        ys = np.array(self.ys, dtype=np.float64, copy=True).ravel()
        hd = np.array(self.heading, dtype=np.float64, copy=True).ravel()
        if not (xs.shape == ys.shape == hd.shape):
            raise ValueError("path arrays must share one length")
        if xs.size < 1:
            raise ValueError("empty path")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("path xs must be strictly increasing")
        for a in (xs, ys, hd):
            a.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "heading", hd)

    @classmethod
    def from_xy(cls, xs, ys, method, smoothed=False, diagnostics=()):
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        return cls(xs, ys, headings(xs, ys), method, smoothed, tuple(diagnostics))

    def __len__(self):
        return self.xs.size

    @property
    def poses(self) -> np.ndarray:
        return np.column_stack([self.xs, self.ys, self.heading])

    def length(self) -> float:
        return float(np.hypot(np.diff(self.xs), np.diff(self.ys)).sum())


def _check_span(b: Boundary, spec: RobotSpec):
    if b.span < spec.length:
        raise ValueError(f"boundary span {b.span:.3f} m is shorter than the robot ({spec.length} m)")


def _disk_envelope(b: Boundary, radius: float, resolution: float) -> np.ndarray:
    margin = 5 * resolution
    grid = rasterize_obstacle(b, resolution, pad_above=margin, pad_below=radius + 2 * margin,
                              pad_x=radius + margin)
    _, ys = lower_envelope(dilate(grid, disk(radius, resolution)))
    start = int(round((b.xs[0] - grid.origin[0]) / resolution))
    return ys[start : start + len(b)]


def plan_disk(b_star: Boundary, radius: float, method: str = "disk") -> PlannedPath:
    """Path of a disk center rolling along the (preprocessed) boundary.

    The boundary's sample step is the raster resolution.
    """
    res = b_star.step
    if radius < res:
        raise ValueError(f"disk radius {radius} is smaller than one cell ({res})")
    ys = _disk_envelope(b_star, radius, res)
    if np.any(~np.isfinite(ys)):
        raise ValueError("dilated boundary has empty columns")
    return PlannedPath.from_xy(b_star.xs, ys, method)


def plan_reference(b_star: Boundary, spec: RobotSpec, method: str) -> PlannedPath:
    radius = {"big": spec.big_radius, "small": spec.small_radius, "mow": spec.mow_radius}[method]
    return plan_disk(b_star, radius, method)


def plan_bsdp(b_raw: Boundary, spec: RobotSpec, *, preprocessed: Boundary | None = None,
              smooth_window: int = 41, threshold: float = 0.0) -> PlannedPath:
    """Big-disk path on concave samples, small-disk path on convex ones."""
    _check_span(b_raw, spec)
    b_star = preprocessed if preprocessed is not None else preprocess_boundary(b_raw, spec)
    profile = convexity(b_star, smooth_window, threshold)
    y_big = plan_disk(b_star, spec.big_radius).ys
    y_small = plan_disk(b_star, spec.small_radius).ys
    y_path = np.where(profile.convex, y_small, y_big)
    return PlannedPath.from_xy(b_star.xs, y_path, "bsdp")


def _extend(b: Boundary, by: float) -> Boundary:
    step = b.step
    k = int(math.ceil(by / step))
    xs = np.concatenate([b.xs[0] - step * np.arange(k, 0, -1), b.xs, b.xs[-1] + step * np.arange(1, k + 1)])
    ys = np.concatenate([np.full(k, b.ys[0]), b.ys, np.full(k, b.ys[-1])])
    return Boundary(xs, ys)


def slide_centers(b: Boundary, length: float, width: float) -> np.ndarray:
    """Robot centers for every chord of ``length`` starting at a boundary sample.

    For sample i the chord ends at the first later point at distance
    ``length`` (interpolated between samples); the center sits at the chord
    midpoint, ``width / 2`` toward the lawn.  Returns an ``(m, 2)`` array;
    samples without a chord ahead are dropped.
    """
    x, y = b.xs, b.ys
    n = x.size
    k = int(math.ceil(length / float(np.min(np.diff(x))))) + 1
    idx = np.arange(n)[:, None] + np.arange(1, k + 1)[None, :]
    valid = idx < n
    idxc = np.minimum(idx, n - 1)
    dist = np.hypot(x[idxc] - x[:, None], y[idxc] - y[:, None])
    reach = valid & (dist >= length)
    has = reach.any(axis=1)
    first = np.argmax(reach, axis=1)
    i = np.nonzero(has)[0]
    j = idx[i, first[i]]
    px = x[j - 1] - x[i]
    py = y[j - 1] - y[i]
    dx = x[j] - x[j - 1]
    dy = y[j] - y[j - 1]
    dd = dx * dx + dy * dy
    pd = px * dx + py * dy
    pp = px * px + py * py
    t = (-pd + np.sqrt(np.maximum(pd * pd - dd * (pp - length * length), 0.0))) / dd
    t = np.clip(t, 0.0, 1.0)
    qx = x[j - 1] + t * dx
    qy = y[j - 1] + t * dy
    ux = (qx - x[i]) / length
    uy = (qy - y[i]) / length
    # lawn-side normal of a left-to-right chord
    cx = 0.5 * (x[i] + qx) + 0.5 * width * uy
    cy = 0.5 * (y[i] + qy) - 0.5 * width * ux
    return np.column_stack([cx, cy])


def _polyline_floor(points: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Lowest y of the polyline through ``points`` above each x (NaN if uncovered)."""
    out = np.full(xs.size, np.inf)
    for (xa, ya), (xb, yb) in zip(points[:-1], points[1:]):
        lo, hi = (xa, xb) if xa <= xb else (xb, xa)
        a = np.searchsorted(xs, lo - 1e-12, side="left")
        b = np.searchsorted(xs, hi + 1e-12, side="right")
        if a >= b:
            continue
        xq = xs[a:b]
        if hi - lo < 1e-12:
            yq = np.full(xq.size, min(ya, yb))
        else:
            yq = ya + (yb - ya) * (xq - xa) / (xb - xa)
        np.minimum(out[a:b], yq, out=out[a:b])
    out[~np.isfinite(out)] = np.nan
    return out


def _convexity_changes(profile, window: int) -> int:
    lab = profile.convex.astype(np.int8)
    flips = np.flatnonzero(np.diff(lab) != 0)
    if flips.size < 2:
        return 0
    return int(np.sum(np.diff(flips) < window))


def plan_scp(b_raw: Boundary, spec: RobotSpec, *, preprocessed: Boundary | None = None,
             smooth_window: int = 41) -> PlannedPath:
    """Sliding-chopstick path fused with the small-disk path by pointwise minimum."""
    _check_span(b_raw, spec)
    b_star = preprocessed if preprocessed is not None else preprocess_boundary(b_raw, spec)
    diagnostics = []
    profile = convexity(b_star, smooth_window)
    window = int(round(spec.length / b_star.step))
    crowded = _convexity_changes(profile, window)
    if crowded:
        msg = f"convexity changes more than once within the robot length at {crowded} places"
        log.warning(msg)
        diagnostics.append(msg)
    y_small = plan_disk(b_star, spec.small_radius).ys
    centers = slide_centers(_extend(b_star, spec.length), spec.length, spec.width)
    y_slide = _polyline_floor(centers, b_star.xs)
    missing = np.isnan(y_slide)
    if missing.any():
        msg = f"no chord of length {spec.length} for {int(missing.sum())} samples; small-disk path used there"
        log.warning(msg)
        diagnostics.append(msg)
    y_path = np.where(missing, y_small, np.fmin(y_slide, y_small))
    return PlannedPath.from_xy(b_star.xs, y_path, "scp", diagnostics=diagnostics)


def smooth_path(p: PlannedPath, spec: RobotSpec, b_star: Boundary, *,
                rms_cells: float = 2.0, correction_span: float = 0.5,
                max_rounds: int = 50) -> PlannedPath:
    """Cubic smoothing spline over the path, followed by a safety pass.

    The spline's residual RMS is bounded by ``rms_cells`` grid cells and the
    result is clamped to never rise above the raw path.  The safety pass then
    lowers the path wherever the body, turned to the path tangent, would
    cross the boundary; each correction is spread over ``correction_span``
    robot lengths and never pushes the path below the big-disk path, where
    any heading is safe.
    """
    n = len(p)
    if n < 4:
        raise ValueError("smoothing needs at least 4 samples")
    res = float(np.median(np.diff(p.xs)))
    spline = UnivariateSpline(p.xs, p.ys, k=3, s=n * (rms_cells * res) ** 2)
    ys = np.minimum(spline(p.xs), p.ys)
    window = max(int(round(spec.length * correction_span / res)) | 1, 3)
    # at or below the big-disk path the body fits in its circumcircle whatever the heading
    floor = np.minimum(p.ys, plan_disk(b_star, spec.big_radius).ys)
    for _ in range(max_rounds):
        excess = ys - sweep.safe_height(p.xs, headings(p.xs, ys), b_star, spec)
        excess[ys <= floor + 1e-12] = 0.0
        if excess.max() <= 1e-9:
            break
        spread = maximum_filter1d(np.maximum(excess, 0.0), window, mode="nearest")
        ys = np.maximum(ys - uniform_filter1d(spread, window, mode="nearest"), floor)
    else:
        log.warning("safety pass did not settle after %d rounds", max_rounds)
    return PlannedPath(p.xs, ys, headings(p.xs, ys), p.method, True, p.diagnostics)


def plan(method: str, b_raw: Boundary, spec: RobotSpec, *, preprocessed: Boundary | None = None,
         smooth: bool = False) -> PlannedPath:
    """Dispatch by method tag; proposed planners are optionally smoothed."""
    if method not in METHODS:
        raise ValueError(f"unknown planner {method!r}; expected one of {METHODS}")
    b_star = preprocessed if preprocessed is not None else preprocess_boundary(b_raw, spec)
    if method in ("big", "small", "mow"):
        return plan_reference(b_star, spec, method)
    planner = plan_bsdp if method == "bsdp" else plan_scp
    path = planner(b_raw, spec, preprocessed=b_star)
    return smooth_path(path, spec, b_star) if smooth else path


def write_path_csv(p: PlannedPath, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        fh.write("x,y,heading\n")
        for x, y, h in zip(p.xs, p.ys, p.heading):
            fh.write(f"{float(x)!r},{float(y)!r},{float(h)!r}\n")


def read_path_csv(path, method: str = "file", smoothed: bool = False) -> PlannedPath:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["x", "y", "heading"]:
            raise ValueError(f"{path}: expected header 'x,y,heading', got {reader.fieldnames}")
        rows = [(float(r["x"]), float(r["y"]), float(r["heading"])) for r in reader]
    if not rows:
        raise ValueError(f"{path}: empty path file")
    xs, ys, hd = zip(*rows)
    return PlannedPath(xs, ys, hd, method, smoothed)
