"""Differential-drive kinematics and a proportional path tracker.

The robot is a unicycle: it moves along its heading and turns in place, never
sideways.  The tracker chases a point a fixed arc length ahead of the
nearest path point with proportional laws on distance and bearing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "RobotState",
    "ControllerGains",
    "TrackingResult",
    "TrackingDivergence",
    "step",
    "track",
    "cross_track_error",
    "write_trajectory_csv",
]


class TrackingDivergence(RuntimeError):
    """The tracker left the path or ran out of steps before reaching its end."""


@dataclass(frozen=True)
class RobotState:
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0
    v: float = 0.0
    omega: float = 0.0


@dataclass(frozen=True)
class ControllerGains:
    k_linear: float = 1.5
    k_angular: float = 3.0
    v_max: float = 0.5
    omega_max: float = 2.0
    lookahead: float = 0.3

    def __post_init__(self):
        if self.k_linear < 0 or self.k_angular < 0:
            raise ValueError("controller gains must be non-negative")
        if not (self.v_max > 0 and self.omega_max > 0 and self.lookahead > 0):
            raise ValueError("v_max, omega_max and lookahead must be positive")


def _wrap(a: float) -> float:
    return (a + math.pi) % (2 * math.pi) - math.pi


def step(s: RobotState, v_cmd: float, omega_cmd: float, dt: float,
         v_max: float = math.inf, omega_max: float = math.inf) -> RobotState:
    """One forward-Euler step of the unicycle model with clamped commands."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    v = min(max(v_cmd, -v_max), v_max)
    w = min(max(omega_cmd, -omega_max), omega_max)
    return RobotState(
        s.x + v * math.cos(s.theta) * dt,
        s.y + v * math.sin(s.theta) * dt,
        s.theta + w * dt,
        v,
        w,
    )


def _segment_distances(px, py, xs, ys):
    ax, ay = xs[:-1], ys[:-1]
    dx, dy = xs[1:] - ax, ys[1:] - ay
    L2 = dx * dx + dy * dy
    t = np.where(L2 > 0, ((px - ax) * dx + (py - ay) * dy) / np.where(L2 > 0, L2, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.hypot(ax + t * dx - px, ay + t * dy - py), t


def cross_track_error(x: float, y: float, xs, ys) -> float:
    """Distance from a point to the path polyline."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size == 1:
        return math.hypot(x - xs[0], y - ys[0])
    d, _ = _segment_distances(x, y, xs, ys)
    return float(d.min())


@dataclass(frozen=True)
class TrackingResult:
    times: np.ndarray
    states: np.ndarray  # columns x, y, theta, v, omega
    cross_track: np.ndarray
    reached: bool

    @property
    def max_error(self) -> float:
        return float(self.cross_track.max(initial=0.0))

    @property
    def rms_error(self) -> float:
        return float(np.sqrt(np.mean(self.cross_track**2))) if self.cross_track.size else 0.0


def track(path, s0: RobotState, gains: ControllerGains = ControllerGains(), dt: float = 0.01, *,
          max_steps: int | None = None, goal_tolerance: float = 0.02,
          divergence: float = 1.0) -> TrackingResult:
    """Drive from ``s0`` along ``path`` (anything with ``xs``/``ys``, or an (n, 2) array)."""
    if hasattr(path, "xs"):
        xs, ys = np.asarray(path.xs, dtype=float), np.asarray(path.ys, dtype=float)
    else:
        arr = np.asarray(path, dtype=float).reshape(-1, 2)
        xs, ys = arr[:, 0], arr[:, 1]
    if xs.size == 0:
        raise ValueError("empty path")
    seg = np.hypot(np.diff(xs), np.diff(ys))
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    total = float(arc[-1])
    if max_steps is None:
        max_steps = int(math.ceil(10 * (total + 1.0) / (gains.v_max * dt)))

    s = s0
    times = [0.0]
    states = [(s.x, s.y, s.theta, s.v, s.omega)]
    errors = [cross_track_error(s.x, s.y, xs, ys)]
    window = max(int(np.ceil(4 * gains.lookahead / max(np.median(seg), 1e-9))) if seg.size else 1, 8)
    nearest = 0
    reached = False
    for k in range(1, max_steps + 1):
        if math.hypot(xs[-1] - s.x, ys[-1] - s.y) <= goal_tolerance:
            reached = True
            break
        if seg.size:
            hi = min(nearest + window, seg.size)
            d, t = _segment_distances(s.x, s.y, xs[nearest : hi + 1], ys[nearest : hi + 1])
            j = int(np.argmin(d))
            nearest = nearest + j
            s_near = arc[nearest] + t[j] * seg[nearest]
            s_target = min(s_near + gains.lookahead, total)
            tx = float(np.interp(s_target, arc, xs))
            ty = float(np.interp(s_target, arc, ys))
        else:
            tx, ty = xs[0], ys[0]
        dx, dy = tx - s.x, ty - s.y
        along = dx * math.cos(s.theta) + dy * math.sin(s.theta)
        bearing = _wrap(math.atan2(dy, dx) - s.theta)
        s = step(s, gains.k_linear * along, gains.k_angular * bearing, dt, gains.v_max, gains.omega_max)
        err = cross_track_error(s.x, s.y, xs, ys)
        times.append(k * dt)
        states.append((s.x, s.y, s.theta, s.v, s.omega))
        errors.append(err)
        if err > divergence:
            raise TrackingDivergence(
                f"cross-track error {err:.3f} m exceeded {divergence} m at t={k * dt:.2f} s"
            )
    if not reached:
        raise TrackingDivergence(
            f"path end not reached within {max_steps} steps "
            f"(remaining {math.hypot(xs[-1] - s.x, ys[-1] - s.y):.3f} m)"
        )
    return TrackingResult(np.array(times), np.array(states), np.array(errors), reached)


def write_trajectory_csv(result: TrackingResult, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        fh.write("t,x,y,theta,v,omega\n")
        for t, row in zip(result.times, result.states):
            fh.write(",".join(repr(float(v)) for v in (t, *row)) + "\n")
