"""Time the compiled kernels against the numpy fallback on workspace-sized inputs.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import sys
import timeit

import numpy as np

from ecpp import _kernels_py
from ecpp.boundary import RobotSpec, generate_boundary, preprocess_boundary, workspace_grid
from ecpp.morphology import disk
from ecpp.planner import plan_disk
from ecpp.sweep import _obstacle_grid

try:
    from ecpp import _kernels
except ImportError:
    _kernels = None


def cases():
    spec = RobotSpec(0.8, 0.4, 0.15)
    b = generate_boundary("sine", {"offset": 2.0, "amplitude": 0.8, "period": 3.0}, span=12.0)
    grid = workspace_grid(b, spec)
    cells = np.ascontiguousarray(grid.cells, dtype=np.uint8)
    runs = disk(spec.big_radius, grid.resolution).runs()
    bs = preprocess_boundary(b, spec)
    og, env = _obstacle_grid(bs, spec)
    poses = np.ascontiguousarray(plan_disk(bs, spec.small_radius).poses)
    fp = (np.ascontiguousarray(og.cells, dtype=np.uint8), env, og.origin[0], og.origin[1], og.resolution,
          poses, spec.length / 2, spec.width / 2)
    sp = plan_disk(bs, spec.small_radius)
    sw = (np.ones((int(0.8 / grid.resolution), len(sp)), dtype=np.uint8), sp.xs[0], 1.0, grid.resolution,
          np.ascontiguousarray(sp.xs), np.ascontiguousarray(sp.ys), spec.mow_radius)
    return [
        (f"dilate {cells.shape[0]}x{cells.shape[1]}, R1 disk", "dilate_runs", (cells, runs)),
        (f"erode  {cells.shape[0]}x{cells.shape[1]}, R1 disk", "erode_runs", (cells, runs)),
        (f"footprint, {len(poses)} poses", "footprint_penetration", fp),
        (f"swept refine, {sw[0].size} cells", "swept_refine", sw),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; only the numpy fallback is available", file=sys.stderr)
    print(f"{'case':<34}{'cython s':>10}{'python s':>10}{'speedup':>9}")
    for label, name, a in cases():
        t_py = min(timeit.repeat(lambda: getattr(_kernels_py, name)(*a), number=1, repeat=args.repeat))
        if _kernels is None:
            print(f"{label:<34}{'-':>10}{t_py:>10.3f}{'-':>9}")
            continue
        t_cy = min(timeit.repeat(lambda: getattr(_kernels, name)(*a), number=1, repeat=args.repeat))
        r_cy, r_py = getattr(_kernels, name)(*a), getattr(_kernels_py, name)(*a)
        same = all(np.allclose(np.asarray(x), np.asarray(y)) for x, y in zip(
            r_cy if isinstance(r_cy, tuple) else (r_cy,), r_py if isinstance(r_py, tuple) else (r_py,)))
        print(f"{label:<34}{t_cy:>10.4f}{t_py:>10.3f}{t_py / t_cy:>8.1f}x{'' if same else '  MISMATCH'}")


if __name__ == "__main__":
    main()
