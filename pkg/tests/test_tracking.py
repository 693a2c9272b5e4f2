import math

import numpy as np
import pytest

from ecpp.tracking import (
    ControllerGains,
    RobotState,
    TrackingDivergence,
    cross_track_error,
    step,
    track,
    write_trajectory_csv,
)

from oracles import unicycle_exact

LINE = np.column_stack([np.linspace(0, 5, 501), np.zeros(501)])


def test_step_moves_along_heading():
    s = step(RobotState(0, 0, math.pi / 2), 1.0, 0.0, 0.5)
    assert s.x == pytest.approx(0.0, abs=1e-12) and s.y == pytest.approx(0.5)
    s = step(RobotState(), 10.0, -10.0, 0.1, v_max=0.5, omega_max=1.0)
    assert s.v == 0.5 and s.omega == -1.0
    with pytest.raises(ValueError):
        step(RobotState(), 1, 0, 0.0)


def test_circle_closure():
    dt, v, w = 1e-3, 0.5, 1.0
    s = RobotState()
    for _ in range(int(round(2 * math.pi / w / dt))):
        s = step(s, v, w, dt)
    assert math.hypot(s.x, s.y) < 1e-2


def test_euler_converges_to_closed_form():
    errs = []
    for dt in (1e-2, 1e-3):
        s = RobotState(0.3, -0.2, 0.4)
        n = int(round(1.0 / dt))
        for _ in range(n):
            s = step(s, 0.8, 0.7, dt)
        ex, ey, _ = unicycle_exact(0.3, -0.2, 0.4, 0.8, 0.7, n * dt)
        errs.append(math.hypot(s.x - ex, s.y - ey))
    assert errs[1] < errs[0] / 5  # first order


def test_offset_start_converges():
    res = track(LINE, RobotState(0.0, 0.1, 0.0), ControllerGains(), dt=0.01)
    assert res.reached
    assert res.cross_track[0] == pytest.approx(0.1)
    assert res.cross_track[-1] < 0.02
    late = res.times > res.times[-1] / 2
    assert res.cross_track[late].max() < 0.02


def test_deterministic():
    a = track(LINE, RobotState(0.0, 0.1, 0.2))
    b = track(LINE, RobotState(0.0, 0.1, 0.2))
    assert np.array_equal(a.states, b.states) and np.array_equal(a.times, b.times)


def test_curved_path():
    t = np.linspace(0, 6, 601)
    path = np.column_stack([t, 0.3 * np.sin(t)])
    res = track(path, RobotState(0, 0, math.atan(0.3)))
    assert res.max_error < 0.02


def test_zero_gains_diverge():
    with pytest.raises(TrackingDivergence):
        track(LINE, RobotState(0.0, 0.1, 0.0), ControllerGains(0.0, 0.0))


def test_gain_validation():
    with pytest.raises(ValueError):
        ControllerGains(k_linear=-1)
    with pytest.raises(ValueError):
        ControllerGains(v_max=0)


def test_cross_track_error():
    assert cross_track_error(2.5, 0.3, LINE[:, 0], LINE[:, 1]) == pytest.approx(0.3)
    assert cross_track_error(-3.0, 4.0, LINE[:, 0], LINE[:, 1]) == pytest.approx(5.0)


def test_trajectory_csv(tmp_path):
    res = track(LINE[:60], RobotState(0, 0, 0))
    write_trajectory_csv(res, tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "t,x,y,theta,v,omega"
    assert len(lines) == len(res.times) + 1
