import math

import numpy as np
import pytest
from scipy.optimize import brentq

from ecpp.boundary import Boundary, RobotSpec, generate_boundary, preprocess_boundary
from ecpp.planner import (
    METHODS,
    PlannedPath,
    plan,
    plan_bsdp,
    plan_disk,
    plan_scp,
    read_path_csv,
    slide_centers,
    smooth_path,
    write_path_csv,
)
from ecpp.sweep import check_collision

from oracles import disk_center_ceiling

SPEC = RobotSpec(0.8, 0.4, 0.15)
CELL = 0.01


@pytest.fixture(scope="module")
def flat():
    b = generate_boundary("flat", {"offset": 2.0}, span=6.0)
    return b, preprocess_boundary(b, SPEC)


@pytest.fixture(scope="module")
def wavy():
    b = generate_boundary("sine", {"offset": 2.0, "amplitude": 0.6, "period": 3.0}, span=9.0)
    return b, preprocess_boundary(b, SPEC)


@pytest.mark.parametrize("method,offset", [
    ("big", math.sqrt(0.2)), ("small", 0.2), ("mow", 0.15), ("bsdp", math.sqrt(0.2)), ("scp", 0.2),
])
def test_flat_offsets(flat, method, offset):
    b, bs = flat
    p = plan(method, b, SPEC, preprocessed=bs)
    assert p.method == method
    assert np.all(np.abs(2.0 - p.ys - offset) <= CELL)


def test_sloped_line_offsets():
    # on a straight line the chord lies on the line and both the small disk and
    # the chopstick sit w/2 away perpendicular, i.e. (w/2)·sqrt(1 + a²) below
    a = 0.3
    xs = np.round(np.arange(0, 601) * 0.01, 10)
    b = Boundary(xs, 1.0 + a * xs)
    bs = preprocess_boundary(b, SPEC)
    expect = 0.2 * math.sqrt(1 + a * a)
    inner = slice(100, -100)
    for m in ("small", "scp"):
        p = plan(m, b, SPEC, preprocessed=bs)
        assert np.all(np.abs(b.ys[inner] - p.ys[inner] - expect) <= 1.5 * CELL), m


def test_disk_paths_match_continuous_oracle(wavy):
    _, bs = wavy
    f = lambda x: np.interp(x, bs.xs, bs.ys)
    for r in (SPEC.big_radius, SPEC.small_radius, SPEC.mow_radius):
        p = plan_disk(bs, r)
        ref = disk_center_ceiling(f, p.xs[::7], r)
        assert np.max(np.abs(ref - p.ys[::7])) <= CELL + 1e-6
    with pytest.raises(ValueError):
        plan_disk(bs, 0.001)


def test_slide_centers_match_root_finding():
    amp, per = 0.5, 2.5
    f = lambda x: 2.0 + amp * np.sin(2 * np.pi * x / per)
    xs = np.round(np.arange(0, 501) * 0.01, 10)
    b = Boundary(xs, f(xs))
    centers = slide_centers(b, 0.8, 0.4)
    rng = np.random.default_rng(1)
    for i in rng.choice(len(centers), 25, replace=False):
        x0 = xs[i]
        d = lambda x: math.hypot(x - x0, f(x) - f(x0)) - 0.8
        # first crossing: scan then refine
        grid = np.linspace(x0, x0 + 0.8, 2001)
        k = int(np.argmax(np.array([d(g) for g in grid]) >= 0))
        x1 = brentq(d, grid[k - 1], grid[k])
        # the sampled curve is a polyline, so compare with a cell's slack
        ux, uy = (x1 - x0) / 0.8, (f(x1) - f(x0)) / 0.8
        cx = 0.5 * (x0 + x1) + 0.2 * uy
        cy = 0.5 * (f(x0) + f(x1)) - 0.2 * ux
        assert abs(centers[i, 0] - cx) < 2e-3 and abs(centers[i, 1] - cy) < 2e-3


def test_scp_reaches_below_small_only_where_fused(wavy):
    b, bs = wavy
    scp = plan_scp(b, SPEC, preprocessed=bs)
    small = plan_disk(bs, SPEC.small_radius)
    big = plan_disk(bs, SPEC.big_radius)
    assert np.all(scp.ys <= small.ys + 1e-12)
    # the chopstick gets deeper than the circumcircle somewhere on a wavy edge
    assert np.any(scp.ys > big.ys + 0.05)


def test_bsdp_switches_between_disks(wavy):
    b, bs = wavy
    p = plan_bsdp(b, SPEC, preprocessed=bs)
    small = plan_disk(bs, SPEC.small_radius).ys
    big = plan_disk(bs, SPEC.big_radius).ys
    on_small = np.isclose(p.ys, small)
    on_big = np.isclose(p.ys, big)
    assert np.all(on_small | on_big)
    assert on_small.any() and on_big.any()


@pytest.mark.parametrize("method", ["bsdp", "scp"])
def test_smoothing_guarantees(wavy, method):
    b, bs = wavy
    raw = plan(method, b, SPEC, preprocessed=bs)
    sm = smooth_path(raw, SPEC, bs)
    assert sm.smoothed and sm.method == method
    assert np.all(sm.ys <= raw.ys + 1e-12)
    assert np.all(sm.ys >= np.minimum(raw.ys, plan_disk(bs, SPEC.big_radius).ys) - 1e-12)
    assert check_collision(sm, bs, SPEC).max_depth <= 0.02


def test_plan_rejects_unknown_and_short(flat):
    b, bs = flat
    with pytest.raises(ValueError):
        plan("spiral", b, SPEC, preprocessed=bs)
    short = generate_boundary("flat", {"offset": 1.0}, span=0.5)
    with pytest.raises(ValueError):
        plan("scp", short, SPEC)


def test_reference_never_smoothed(flat):
    b, bs = flat
    assert not plan("big", b, SPEC, preprocessed=bs, smooth=True).smoothed
    assert plan("scp", b, SPEC, preprocessed=bs, smooth=True).smoothed


def test_path_validation():
    with pytest.raises(ValueError):
        PlannedPath([0, 0], [1, 1], [0, 0], "x")
    p = PlannedPath.from_xy([0, 3, 6], [0, 4, 8], "x")
    assert p.length() == pytest.approx(10.0)
    assert p.poses.shape == (3, 3)


def test_path_csv_roundtrip(tmp_path, wavy):
    b, bs = wavy
    p = plan("scp", b, SPEC, preprocessed=bs)
    write_path_csv(p, tmp_path / "p.csv")
    text = (tmp_path / "p.csv").read_text()
    assert text.startswith("x,y,heading\n") and "np." not in text
    q = read_path_csv(tmp_path / "p.csv", "scp")
    assert np.array_equal(q.xs, p.xs) and np.array_equal(q.ys, p.ys) and np.array_equal(q.heading, p.heading)


def test_methods_tuple():
    assert set(METHODS) == {"big", "small", "mow", "bsdp", "scp"}
