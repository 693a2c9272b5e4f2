import json
import subprocess
import sys

import pytest

from ecpp.cli import ConfigError, RunConfig, compare, main, reduction
from ecpp.sweep import CoverageReport

FLAT = {
    "boundary": {"kind": "flat", "params": {"offset": 2.0}, "span": 6.0},
    "robot": {"length": 0.8, "width": 0.4, "mow_radius": 0.15},
    "resolution": 0.01,
}


def write_cfg(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def test_config_rejects_bad_input():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**FLAT, "planners": []})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**FLAT, "planners": ["scp", "nope"]})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**FLAT, "extra": 1})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**FLAT, "robot": {"length": 0.8, "width": 0.4, "mow_radius": 0.3}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**FLAT, "tracking": {"enabled": True, "gains": {"k_turn": 1}}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"robot": FLAT["robot"]})


def test_csv_boundary_resampled(tmp_path):
    (tmp_path / "b.csv").write_text("x,y\n0,2\n1,2.5\n2,2\n")
    cfg = RunConfig.from_dict({**FLAT, "boundary": {"kind": "csv", "path": "b.csv"}}, tmp_path)
    b = cfg.build_boundary()
    assert len(b) == 201 and b(0.5) == pytest.approx(2.25)


def test_run_writes_outputs(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {**FLAT, "planners": ["big", "scp"], "tracking": {"enabled": True}})
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out)]) == 0
    names = {p.name for p in out.iterdir()}
    assert {"big_path.csv", "scp_path.csv", "big_report.json", "scp_report.json", "trajectory.csv",
            "fig_preprocess.svg", "fig_convexity.svg", "fig_paths.svg", "fig_footprints.svg",
            "fig_uncut.svg", "fig_tracking.svg"} <= names
    printed = capsys.readouterr().out
    assert "scp" in printed and "vs big" in printed
    rep = json.loads((out / "scp_report.json").read_text())
    assert rep["uncut_area_m2"] / 6.0 == pytest.approx(0.05, rel=0.02)


def test_quiet_run_prints_nothing(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {**FLAT, "planners": ["small"]})
    assert main(["--quiet", "run", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert capsys.readouterr().out == ""


def test_failing_planner_does_not_stop_others(tmp_path):
    # a boundary shorter than the robot breaks the proposed planners only
    cfg = write_cfg(tmp_path, {**FLAT, "boundary": {"kind": "flat", "params": {"offset": 1.0}, "span": 0.5},
                               "planners": ["small", "scp"]})
    out = tmp_path / "o"
    assert main(["--quiet", "run", str(cfg), "--out", str(out)]) == 1
    assert (out / "small_report.json").exists() and not (out / "scp_report.json").exists()
    assert "scp" in json.loads((out / "errors.json").read_text())


def test_validate_and_exit_codes(tmp_path, capsys):
    good = write_cfg(tmp_path, FLAT)
    bad = write_cfg(tmp_path, {**FLAT, "planners": []}, "bad.json")
    assert main(["validate", str(good)]) == 0
    assert main(["validate", str(bad)]) == 2
    assert main(["run", str(bad)]) == 2
    (tmp_path / "broken.json").write_text("{")
    assert main(["validate", str(tmp_path / "broken.json")]) == 2


def test_compare_arithmetic():
    rows = compare([CoverageReport("big", 4.2734, 0, 0, 0, 0), CoverageReport("bsdp", 3.4039, 0, 0, 0, 0),
                    CoverageReport("scp", 1.676, 0, 0, 0, 0)])
    pct = {r["method"]: r["reduction_pct"] for r in rows}
    assert pct["big"] == 0.0
    assert pct["bsdp"] == pytest.approx(20.35, abs=0.01)
    assert pct["scp"] == pytest.approx(60.78, abs=0.01)
    assert reduction(0.0, 1.0) == 0.0


def test_compare_errors(tmp_path, capsys):
    a = CoverageReport("big", 2.0, 0, 0, 0, 0, "aaa")
    b = CoverageReport("scp", 1.0, 0, 0, 0, 0, "bbb")
    with pytest.raises(ValueError):
        compare([a, b])
    with pytest.raises(ValueError):
        compare([b, CoverageReport("bsdp", 1.0, 0, 0, 0, 0, "bbb")])
    a.write(tmp_path / "a.json")
    b.write(tmp_path / "b.json")
    assert main(["compare", str(tmp_path / "a.json"), str(tmp_path / "b.json")]) == 2


def test_module_entry_point(tmp_path):
    cfg = write_cfg(tmp_path, FLAT)
    r = subprocess.run([sys.executable, "-m", "ecpp", "validate", str(cfg)], capture_output=True, text=True)
    assert r.returncode == 0 and "ok" in r.stdout
