"""Command line pipeline: plan, score and plot edge paths from a JSON config.

    ecpp run config.json [--out DIR] [--quiet]
    ecpp validate config.json
    ecpp compare report.json [report.json ...]
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import svg
from .boundary import (
    Boundary,
    RobotSpec,
    convexity,
    generate_boundary,
    lower_envelope,
    preprocess_stages,
    read_boundary_csv,
)
from .planner import METHODS, PlannedPath, plan, write_path_csv
from .sweep import CoverageReport, FootprintPose, uncut_area
from .tracking import ControllerGains, RobotState, TrackingDivergence, track, write_trajectory_csv

log = logging.getLogger("ecpp")


class ConfigError(ValueError):
    pass


_TOP_KEYS = {"boundary", "robot", "resolution", "planners", "smoothing", "tracking", "output_dir", "tolerance"}
_BOUNDARY_KEYS = {"kind", "params", "span", "step", "path"}
_ROBOT_KEYS = {"length", "width", "mow_radius"}
_TRACKING_KEYS = {"enabled", "method", "dt", "gains"}
_GAIN_KEYS = {"k_linear", "k_angular", "v_max", "omega_max", "lookahead"}


def _reject_unknown(d: dict, allowed: set, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be an object")
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


@dataclass
class RunConfig:
    boundary: dict
    robot: RobotSpec
    resolution: float = 0.01
    planners: list = field(default_factory=lambda: list(METHODS))
    smoothing: bool = True
    tracking: dict = field(default_factory=dict)
    output_dir: str = "ecpp_out"
    tolerance: float = 0.02
    base_dir: Path = field(default=Path("."), repr=False)

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | str = ".") -> "RunConfig":
        _reject_unknown(d, _TOP_KEYS, "config")
        if "boundary" not in d or "robot" not in d:
            raise ConfigError("config needs 'boundary' and 'robot'")
        _reject_unknown(d["boundary"], _BOUNDARY_KEYS, "boundary")
        _reject_unknown(d["robot"], _ROBOT_KEYS, "robot")
        try:
            robot = RobotSpec(float(d["robot"]["length"]), float(d["robot"]["width"]),
                              float(d["robot"]["mow_radius"]))
        except KeyError as e:
            raise ConfigError(f"robot is missing {e}") from None
        except ValueError as e:
            raise ConfigError(str(e)) from None
        resolution = float(d.get("resolution", 0.01))
        if not resolution > 0:
            raise ConfigError(f"resolution must be positive, got {resolution}")
        planners = list(d.get("planners", METHODS))
        if not planners:
            raise ConfigError("planners must name at least one of " + ", ".join(METHODS))
        bad = [p for p in planners if p not in METHODS]
        if bad:
            raise ConfigError(f"unknown planner(s): {', '.join(bad)}")
        if len(set(planners)) != len(planners):
            raise ConfigError("planners must not repeat")
        tracking = dict(d.get("tracking", {}))
        _reject_unknown(tracking, _TRACKING_KEYS, "tracking")
        _reject_unknown(tracking.get("gains", {}), _GAIN_KEYS, "tracking.gains")
        if tracking.get("enabled") and tracking.get("method", "scp") not in planners:
            raise ConfigError("tracking.method must be one of the configured planners")
        try:
            ControllerGains(**tracking.get("gains", {}))
        except ValueError as e:
            raise ConfigError(str(e)) from None
        kind = d["boundary"].get("kind")
        if kind is None:
            raise ConfigError("boundary needs a 'kind'")
        if kind == "csv" and "path" not in d["boundary"]:
            raise ConfigError("csv boundary needs a 'path'")
        tol = float(d.get("tolerance", 0.02))
        return cls(d["boundary"], robot, resolution, planners, bool(d.get("smoothing", True)),
                   tracking, str(d.get("output_dir", "ecpp_out")), tol, Path(base_dir))

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON ({e})") from None
        return cls.from_dict(data, path.parent)

    def build_boundary(self) -> Boundary:
        spec = self.boundary
        kind = spec["kind"]
        if kind == "csv":
            b = read_boundary_csv(self.base_dir / spec["path"])
            return _resample(b, self.resolution)
        span = float(spec.get("span", 10.0))
        step = float(spec.get("step", self.resolution))
        b = generate_boundary(kind, spec.get("params", {}), span=span, step=step)
        return _resample(b, self.resolution)


def _resample(b: Boundary, res: float) -> Boundary:
    if b.is_uniform() and abs(b.step - res) <= 1e-9 * res:
        return b
    n = int(round(b.span / res)) + 1
    xs = b.xs[0] + np.arange(n) * res
    return Boundary(xs, b(xs))


def reduction(baseline: float, value: float) -> float:
    """Percent less uncut area than ``baseline``."""
    if baseline == 0:
        return 0.0
    return 100.0 * (baseline - value) / baseline


def compare(reports) -> list[dict]:
    """Uncut areas and reduction versus the big-disk report."""
    reports = list(reports)
    if len(reports) < 2:
        raise ValueError("compare needs at least two reports")
    digests = {r.boundary for r in reports if r.boundary is not None}
    if len(digests) > 1:
        raise ValueError("reports come from different boundaries")
    base = [r for r in reports if r.method == "big"]
    if not base:
        raise ValueError("compare needs the big-disk report as baseline")
    b = base[0].uncut_area
    return [
        {"method": r.method, "uncut_area_m2": r.uncut_area, "reduction_pct": reduction(b, r.uncut_area)}
        for r in reports
    ]


def format_table(rows: list[dict]) -> str:
    lines = [f"{'method':<8}{'uncut m2':>12}{'vs big %':>11}"]
    for r in rows:
        lines.append(f"{r['method']:<8}{r['uncut_area_m2']:>12.4f}{r['reduction_pct']:>11.2f}")
    return "\n".join(lines)


def _write_figures(out: Path, b_raw, stages, paths, reports, spec, trajectory):
    b_star = stages.boundary
    top = float(max(b_raw.ys.max(), b_star.ys.max())) + 0.3
    # preprocessing stages
    fig = svg.Figure(title="Boundary preprocessing (closing with the big disk)")
    _, dil = lower_envelope(stages.dilated)
    xs_grid = stages.raw.xs
    keep = (xs_grid >= b_raw.xs[0] - 1e-9) & (xs_grid <= b_raw.xs[-1] + 1e-9)
    for title, env_x, env_y in (
        ("original boundary", b_raw.xs, b_raw.ys),
        ("dilated by big disk", xs_grid[keep], dil[keep]),
        ("closed (dilated then eroded)", b_star.xs, b_star.ys),
    ):
        p = fig.panel(title=title, equal=True, ylabel="y [m]")
        p.fill_above(env_x, env_y, top, svg.PALETTE["obstacle"], label="obstacle")
        p.line(b_raw.xs, b_raw.ys, svg.PALETTE["boundary"], label="original")
    fig.panels[-1].xlabel = "x [m]"
    fig.save(out / "fig_preprocess.svg")

    prof = convexity(b_star, 41)
    fig = svg.Figure(title="Convexity of the preprocessed boundary")
    fig.panel(title="preprocessed boundary", ylabel="y").line(b_star.xs, b_star.ys, svg.PALETTE["preprocessed"])
    fig.panel(title="first derivative", ylabel="dy/dx").line(prof.xs, prof.ydot, "#333")
    p = fig.panel(title="second derivative (positive = convex)", ylabel="d2y/dx2", xlabel="x [m]")
    p.line(prof.xs, prof.yddot, "#333")
    p.line(prof.xs, np.zeros_like(prof.xs), "#999", width=0.8, dash="4 3")
    fig.save(out / "fig_convexity.svg")

    fig = svg.Figure(title="Planned paths")
    p = fig.panel(equal=True, xlabel="x [m]", ylabel="y [m]")
    p.fill_above(b_raw.xs, b_raw.ys, top, svg.PALETTE["obstacle"])
    p.line(b_raw.xs, b_raw.ys, svg.PALETTE["boundary"], label="boundary")
    p.line(b_star.xs, b_star.ys, svg.PALETTE["preprocessed"], width=1, dash="5 3", label="preprocessed")
    for m, path in paths.items():
        p.line(path.xs, path.ys, svg.PALETTE[m], label=m)
    fig.save(out / "fig_paths.svg")

    fig = svg.Figure(title="Robot footprints along the paths")
    for m in [m for m in ("big", "bsdp", "scp") if m in paths]:
        path = paths[m]
        p = fig.panel(title=m, equal=True, ylabel="y [m]")
        p.fill_above(b_star.xs, b_star.ys, top, svg.PALETTE["obstacle"])
        every = max(len(path) // 60, 1)
        for x, y, h in path.poses[::every]:
            c = FootprintPose.of(x, y, h, spec).corners()
            p.polygon(c[:, 0], c[:, 1], svg.PALETTE[m], opacity=0.15, stroke=svg.PALETTE[m])
        p.line(path.xs, path.ys, svg.PALETTE[m], label=m)
    if fig.panels:
        fig.panels[-1].xlabel = "x [m]"
        fig.save(out / "fig_footprints.svg")

    if reports:
        fig = svg.Figure(width=600, title="Uncut area")
        order = [m for m in ("mow", "small", "big", "bsdp", "scp") if m in reports]
        fig.panel(ylabel="uncut area [m2]", height=260).bars(
            order, [reports[m].uncut_area for m in order], [svg.PALETTE[m] for m in order])
        fig.save(out / "fig_uncut.svg")

    if trajectory is not None:
        method, path, result = trajectory
        fig = svg.Figure(title=f"Tracking the {method} path")
        p = fig.panel(equal=True, xlabel="x [m]", ylabel="y [m]")
        p.fill_above(b_raw.xs, b_raw.ys, top, svg.PALETTE["obstacle"])
        p.line(path.xs, path.ys, svg.PALETTE["reference"], label="reference")
        p.line(result.states[:, 0], result.states[:, 1], svg.PALETTE["tracked"], width=1, label="tracked")
        fig.save(out / "fig_tracking.svg")


def run(config: RunConfig, out_dir: Path | str | None = None, quiet: bool = False) -> int:
    out = Path(out_dir) if out_dir is not None else Path(config.output_dir)
    spec = config.robot
    b_raw = config.build_boundary()
    stages = preprocess_stages(b_raw, spec)
    b_star = stages.boundary

    paths: dict[str, PlannedPath] = {}
    reports: dict[str, CoverageReport] = {}
    errors: dict[str, str] = {}
    for m in config.planners:
        try:
            path = plan(m, b_raw, spec, preprocessed=b_star, smooth=config.smoothing)
            reports[m] = uncut_area(path, b_raw, spec, b_star=b_star, tolerance=config.tolerance)
            paths[m] = path
        except Exception as e:  # one failing planner must not sink the others
            errors[m] = f"{type(e).__name__}: {e}"
            log.error("planner %s failed: %s", m, errors[m])

    trajectory = None
    if config.tracking.get("enabled"):
        method = config.tracking.get("method", "scp")
        if method in paths:
            path = paths[method]
            gains = ControllerGains(**config.tracking.get("gains", {}))
            s0 = RobotState(path.xs[0], path.ys[0], path.heading[0])
            try:
                result = track(path, s0, gains, float(config.tracking.get("dt", 0.01)))
                trajectory = (method, path, result)
            except TrackingDivergence as e:
                errors["tracking"] = str(e)
                log.error("tracking failed: %s", e)

    out.mkdir(parents=True, exist_ok=True)
    for m, path in paths.items():
        write_path_csv(path, out / f"{m}_path.csv")
        reports[m].write(out / f"{m}_report.json")
    if trajectory is not None:
        write_trajectory_csv(trajectory[2], out / "trajectory.csv")
    _write_figures(out, b_raw, stages, paths, reports, spec, trajectory)
    if errors:
        (out / "errors.json").write_text(json.dumps(errors, indent=2, sort_keys=True) + "\n")

    if not quiet:
        if len(reports) >= 2 and "big" in reports:
            print(format_table(compare(reports.values())))
        else:
            for r in reports.values():
                print(f"{r.method:<8}{r.uncut_area:>12.4f}")
        for m, r in reports.items():
            status = "ok" if r.max_violation <= config.tolerance else "VIOLATION"
            print(f"{m}: max body penetration {r.max_violation:.3f} m ({status})")
        if trajectory is not None:
            res = trajectory[2]
            print(f"tracking {trajectory[0]}: max cross-track {res.max_error:.4f} m, rms {res.rms_error:.4f} m")
        for k, v in errors.items():
            print(f"error [{k}]: {v}", file=sys.stderr)
    return 1 if errors else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ecpp", description=__doc__.splitlines()[0])
    parser.add_argument("--quiet", action="store_true", help="suppress the summary table and warnings")
    sub = parser.add_subparsers(dest="cmd", required=True)
    p_run = sub.add_parser("run", help="plan, score and plot from a config file")
    p_run.add_argument("config")
    p_run.add_argument("--out", help="output directory (overrides output_dir)")
    p_run.add_argument("--seed", type=int, default=0, help="reserved for randomized corpora")
    p_run.add_argument("--quiet", action="store_true", dest="quiet_run")
    p_val = sub.add_parser("validate", help="check a config file without running it")
    p_val.add_argument("config")
    p_cmp = sub.add_parser("compare", help="tabulate reports against the big-disk baseline")
    p_cmp.add_argument("reports", nargs="+")
    args = parser.parse_args(argv)
    quiet = args.quiet or getattr(args, "quiet_run", False)
    logging.basicConfig(level=logging.ERROR if quiet else logging.WARNING, format="%(levelname)s %(message)s")

    if args.cmd == "compare":
        try:
            rows = compare(CoverageReport.read(p) for p in args.reports)
        except (ValueError, KeyError, OSError) as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        print(format_table(rows))
        return 0

    try:
        config = RunConfig.load(args.config)
        if args.cmd == "validate":
            config.build_boundary()
            print(f"{args.config}: ok")
            return 0
        return run(config, args.out, quiet)
    except (ConfigError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
