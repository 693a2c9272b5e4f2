"""Pure numpy fallback for the compiled kernels in ``_kernels.pyx``.

Same signatures and bit-identical outputs; used when the extension is not
built or when ``ECPP_PURE_PYTHON=1``.
"""
import numpy as np


def _row_prefix(a):
    p = np.zeros((a.shape[0], a.shape[1] + 1), dtype=np.int32)
    np.cumsum(a != 0, axis=1, dtype=np.int32, out=p[:, 1:])
    return p


def dilate_runs(a, runs):
    h, w = a.shape
    out = np.zeros((h, w), dtype=bool)
    p = _row_prefix(a)
    x = np.arange(w)
    horiz = {}
    for dy, lo, hi in np.asarray(runs, dtype=np.int64).reshape(-1, 3):
        key = (int(lo), int(hi))
        if key not in horiz:
            c0 = np.clip(x - hi, 0, w)
            c1 = np.clip(x - lo + 1, 0, w)
            horiz[key] = (c1 > c0) & ((p[:, c1] - p[:, c0]) > 0)
        hz = horiz[key]
        dy = int(dy)
        if dy >= h or -dy >= h:
            continue
        if dy >= 0:
            out[dy:] |= hz[: h - dy]
        else:
            out[: h + dy] |= hz[-dy:]
    return out.astype(np.uint8)


def erode_runs(a, runs):
    h, w = a.shape
    out = np.ones((h, w), dtype=bool)
    p = _row_prefix(a)
    x = np.arange(w)
    horiz = {}
    for dy, lo, hi in np.asarray(runs, dtype=np.int64).reshape(-1, 3):
        key = (int(lo), int(hi))
        if key not in horiz:
            c0 = x + lo
            c1 = x + hi
            inside = (c0 >= 0) & (c1 <= w - 1)
            c0c = np.clip(c0, 0, w)
            c1c = np.clip(c1 + 1, 0, w)
            horiz[key] = inside & ((p[:, c1c] - p[:, c0c]) == (hi - lo + 1))
        hz = horiz[key]
        dy = int(dy)
        if dy >= h or -dy >= h:
            out[:] = False
            continue
        shifted = np.zeros((h, w), dtype=bool)
        if dy >= 0:
            shifted[: h - dy] = hz[dy:]
        else:
            shifted[-dy:] = hz[: h + dy]
        out &= shifted
    return out.astype(np.uint8)


def _body_top(qx, qy, xs):
    """Highest point of the convex polygon (qx, qy) over each x in ``xs``."""
    top = np.full(xs.shape, -np.inf)
    for k in range(4):
        xa, ya, xb, yb = qx[k], qy[k], qx[(k + 1) % 4], qy[(k + 1) % 4]
        if xa > xb:
            xa, ya, xb, yb = xb, yb, xa, ya
        on = (xs >= xa - 1e-9) & (xs <= xb + 1e-9)
        if xb - xa < 1e-12:
            y = np.full(xs.shape, max(ya, yb))
        else:
            y = ya + (yb - ya) * (xs - xa) / (xb - xa)
        top = np.where(on, np.maximum(top, y), top)
    return top


def footprint_penetration(obstacle, envelope, x0, y0, res, poses, half_length, half_width):
    h, w = obstacle.shape
    envelope = np.asarray(envelope, dtype=np.float64)
    grid_x = x0 + np.arange(w) * res
    poses = np.asarray(poses, dtype=np.float64).reshape(-1, 3)
    n = poses.shape[0]
    depth = np.zeros(n, dtype=np.float64)
    count = np.zeros(n, dtype=np.int64)
    reach = np.sqrt(half_length**2 + half_width**2)
    eps = 1e-9
    su = np.array([1.0, -1.0, -1.0, 1.0])
    sv = np.array([1.0, 1.0, -1.0, -1.0])
    for i, (px, py, theta) in enumerate(poses):
        ct, st = np.cos(theta), np.sin(theta)
        qx = px + su * half_length * ct - sv * half_width * st
        qy = py + su * half_length * st + sv * half_width * ct
        best = max(float(np.max(qy - np.interp(qx, grid_x, envelope))), 0.0)
        lo = max(int(np.ceil((qx.min() - x0) / res - eps)), 0)
        hi = min(int(np.floor((qx.max() - x0) / res + eps)), w - 1)
        if lo <= hi:
            cols = np.arange(lo, hi + 1)
            d = _body_top(qx, qy, grid_x[cols]) - envelope[cols]
            best = max(best, float(d.max()))
        depth[i] = best

        c0 = max(int(np.floor((px - reach - x0) / res)), 0)
        c1 = min(int(np.ceil((px + reach - x0) / res)), w - 1)
        r0 = max(int(np.floor((py - reach - y0) / res)), 0)
        r1 = min(int(np.ceil((py + reach - y0) / res)), h - 1)
        if c0 > c1 or r0 > r1:
            continue
        cy = (y0 + np.arange(r0, r1 + 1) * res)[:, None]
        cx = (x0 + np.arange(c0, c1 + 1) * res)[None, :]
        u = (cx - px) * ct + (cy - py) * st
        v = -(cx - px) * st + (cy - py) * ct
        inside = (np.abs(u) <= half_length + eps) & (np.abs(v) <= half_width + eps)
        count[i] = int(np.count_nonzero(inside & (obstacle[r0 : r1 + 1, c0 : c1 + 1] != 0)))
    return depth, count


def swept_refine(candidates, x0, y0, res, xs, ys, radius):
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    rows, cols = np.nonzero(np.asarray(candidates))
    cx = x0 + cols * res
    cy = y0 + rows * res
    hit = np.zeros(rows.size, dtype=bool)
    if xs.size == 1:
        hit = (cx - xs[0]) ** 2 + (cy - ys[0]) ** 2 <= radius * radius
    else:
        nseg = xs.size - 1
        lo = np.clip(np.searchsorted(xs, cx - radius, side="left") - 1, 0, nseg - 1)
        hi = np.clip(np.searchsorted(xs, cx + radius, side="right") - 1, 0, nseg - 1)
        for k in range(int((hi - lo).max(initial=0)) + 1):
            j = lo + k
            live = (j <= hi) & ~hit
            if not live.any():
                break
            jj = j[live]
            ax, ay = xs[jj], ys[jj]
            dx, dy = xs[jj + 1] - ax, ys[jj + 1] - ay
            px, py = cx[live], cy[live]
            t = np.clip(((px - ax) * dx + (py - ay) * dy) / (dx * dx + dy * dy), 0.0, 1.0)
            ex, ey = ax + t * dx - px, ay + t * dy - py
            hit[live] = ex * ex + ey * ey <= radius * radius
    out = np.zeros(np.shape(candidates), dtype=np.uint8)
    out[rows[hit], cols[hit]] = 1
    return out
