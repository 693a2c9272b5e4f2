import json
import math

import numpy as np
import pytest

from ecpp import _backend, _kernels_py
from ecpp.boundary import RobotSpec, generate_boundary, preprocess_boundary
from ecpp.planner import PlannedPath, plan, plan_disk
from ecpp.sweep import (
    CoverageReport,
    FootprintPose,
    _obstacle_grid,
    _grid_around,
    boundary_digest,
    check_collision,
    footprint_depths,
    rasterize_polyline,
    safe_height,
    swept_region,
    uncut_area,
)

from oracles import perimeter_depth, swept_brute

SPEC = RobotSpec(0.8, 0.4, 0.15)


@pytest.fixture(scope="module")
def wavy():
    b = generate_boundary("sine", {"offset": 2.0, "amplitude": 0.6, "period": 3.0}, span=9.0)
    return b, preprocess_boundary(b, SPEC)


def random_path(seed, n):
    rng = np.random.default_rng(seed)
    xs = np.cumsum(rng.uniform(0.005, 0.03, n))
    ys = 1.0 + np.cumsum(rng.normal(0, 0.01, n))
    return PlannedPath.from_xy(xs, ys, "t")


def test_footprint_corners():
    c = FootprintPose(1.0, 2.0, math.pi / 2, 0.4, 0.2).corners()
    assert np.allclose(sorted(map(tuple, np.round(c, 12))), [(0.8, 1.6), (0.8, 2.4), (1.2, 1.6), (1.2, 2.4)])


@pytest.mark.parametrize("seed,n", [(0, 20), (1, 120), (2, 200)])
def test_swept_region_brute_force(seed, n):
    p = random_path(seed, n)
    grid = _grid_around(p.xs, p.ys, 0.2, 0.01)
    swept = swept_region(p, SPEC, grid=grid).cells
    assert np.array_equal(swept, swept_brute(grid.xs, grid.ys, p.xs, p.ys, SPEC.mow_radius))


def test_swept_refine_backends_agree():
    p = random_path(4, 300)
    grid = _grid_around(p.xs, p.ys, 0.2, 0.01)
    cand = np.ones(grid.cells.shape, dtype=np.uint8)
    args = (grid.origin[0], grid.origin[1], 0.01, np.ascontiguousarray(p.xs), np.ascontiguousarray(p.ys), 0.15)
    assert np.array_equal(np.asarray(_backend.swept_refine(cand, *args)), _kernels_py.swept_refine(cand, *args))


def test_swept_single_pose_is_disk():
    one = PlannedPath.from_xy([1.0], [1.0], "x")
    g = swept_region(one, SPEC, resolution=0.01)
    assert np.array_equal(g.cells, swept_brute(g.xs, g.ys, [1.0], [1.0], SPEC.mow_radius))


def test_rasterize_polyline_connected():
    p = random_path(5, 50)
    grid = _grid_around(p.xs, p.ys, 0.05, 0.01)
    cells = rasterize_polyline(grid, p.xs, p.ys).cells
    cols = np.nonzero(cells.any(axis=0))[0]
    assert np.all(np.diff(cols) == 1)


def test_collision_depth_matches_perimeter_oracle(wavy):
    _, bs = wavy
    f = lambda x: np.interp(x, bs.xs, bs.ys)
    rng = np.random.default_rng(0)
    poses = np.column_stack([rng.uniform(0.5, 8.5, 150), rng.uniform(1.2, 2.4, 150),
                             rng.uniform(-np.pi, np.pi, 150)])
    small = plan_disk(bs, SPEC.small_radius).poses[::15]
    poses = np.vstack([poses, small])
    depths, _ = footprint_depths(poses, bs, SPEC)
    oracle = np.array([perimeter_depth(x, y, h, 0.4, 0.2, f) for x, y, h in poses])
    assert np.max(np.abs(depths - oracle)) <= 0.01


def test_collision_backends_agree(wavy):
    _, bs = wavy
    grid, env = _obstacle_grid(bs, SPEC)
    rng = np.random.default_rng(9)
    poses = np.ascontiguousarray(np.column_stack([rng.uniform(0, 9, 80), rng.uniform(1.2, 2.4, 80),
                                                  rng.uniform(-3, 3, 80)]))
    args = (np.ascontiguousarray(grid.cells, dtype=np.uint8), env, grid.origin[0], grid.origin[1],
            grid.resolution, poses, 0.4, 0.2)
    d1, c1 = _backend.footprint_penetration(*args)
    d2, c2 = _kernels_py.footprint_penetration(*args)
    assert np.allclose(d1, d2, atol=1e-12) and np.array_equal(c1, c2)


def test_safe_height_is_tight(wavy):
    _, bs = wavy
    xs = np.linspace(1, 8, 30)
    hd = np.linspace(-0.6, 0.6, 30)
    ys = safe_height(xs, hd, bs, SPEC)
    f = lambda x: np.interp(x, bs.xs, bs.ys)
    for x, y, h in zip(xs, ys, hd):
        assert perimeter_depth(x, y, h, 0.4, 0.2, f) <= 1e-3
        assert perimeter_depth(x, y + 0.005, h, 0.4, 0.2, f) > 0


def test_check_collision_flags_reference_paths(wavy):
    _, bs = wavy
    big = check_collision(plan_disk(bs, SPEC.big_radius, "big"), bs, SPEC)
    assert big.passed and big.violations == 0
    mow = check_collision(plan_disk(bs, SPEC.mow_radius, "mow"), bs, SPEC)
    assert not mow.passed and mow.violations > 0 and mow.max_depth > 0.1
    far = PlannedPath.from_xy([-5.0, 20.0], [0.0, 0.0], "x")
    with pytest.raises(ValueError):
        check_collision(far, bs, SPEC)


def test_flat_uncut_per_meter():
    b = generate_boundary("flat", {"offset": 2.0}, span=10.0)
    bs = preprocess_boundary(b, SPEC)
    for m, gap in (("scp", 0.2), ("small", 0.2), ("mow", 0.15)):
        r = uncut_area(plan(m, b, SPEC, preprocessed=bs), b, SPEC, b_star=bs)
        per_m = r.uncut_area / b.span
        assert per_m == pytest.approx(max(gap - SPEC.mow_radius, 0.0), rel=0.02, abs=1e-3), m
        if m != "mow":  # the deck-sized reference ignores the body
            assert r.max_violation <= 1e-9
    r = uncut_area(plan("big", b, SPEC, preprocessed=bs), b, SPEC, b_star=bs)
    assert r.uncut_area / b.span == pytest.approx(math.sqrt(0.2) - 0.15, abs=0.011)


def test_uncut_rejects_path_through_boundary():
    b = generate_boundary("flat", {"offset": 2.0}, span=4.0)
    p = PlannedPath.from_xy(b.xs, np.full(len(b), 2.1), "x")
    with pytest.raises(ValueError):
        uncut_area(p, b, SPEC)


def test_report_json_roundtrip(tmp_path):
    r = CoverageReport("scp", 1.5, 2.0, 12.0, 0.01, 3, "abc")
    r.write(tmp_path / "r.json")
    d = json.loads((tmp_path / "r.json").read_text())
    assert d["uncut_area_m2"] == 1.5 and d["boundary_digest"] == "abc"
    assert CoverageReport.read(tmp_path / "r.json") == r
    assert "boundary_digest" not in CoverageReport("big", 1, 1, 1, 0, 0).to_dict()


def test_digest_stable():
    a = generate_boundary("sine", {"amplitude": 0.1, "period": 1.0}, span=2.0)
    b = generate_boundary("sine", {"amplitude": 0.1, "period": 1.0}, span=2.0)
    c = generate_boundary("sine", {"amplitude": 0.2, "period": 1.0}, span=2.0)
    assert boundary_digest(a) == boundary_digest(b) != boundary_digest(c)
