# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for run-decomposed binary morphology and footprint checks.

Structuring elements arrive as rows of ``(dy, lo, hi)``: every offset
``(dx, dy)`` with ``lo <= dx <= hi``.  The pure-Python twin lives in
``_kernels_py`` and must return identical arrays.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, floor, ceil, sqrt, fabs

cnp.import_array()


cdef cnp.int32_t[:, ::1] _row_prefix(const cnp.uint8_t[:, ::1] a):
    cdef Py_ssize_t h = a.shape[0], w = a.shape[1], r, c
    cdef cnp.int32_t[:, ::1] p = np.zeros((h, w + 1), dtype=np.int32)
    for r in range(h):
        for c in range(w):
            p[r, c + 1] = p[r, c] + (a[r, c] != 0)
    return p


def dilate_runs(const cnp.uint8_t[:, ::1] a, const cnp.int64_t[:, ::1] runs):
    cdef Py_ssize_t h = a.shape[0], w = a.shape[1], nruns = runs.shape[0]
    cdef Py_ssize_t y, x, k, sy, c0, c1
    cdef cnp.int64_t dy, lo, hi
    cdef cnp.int32_t[:, ::1] p = _row_prefix(a)
    out_arr = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] out = out_arr
    for y in range(h):
        for x in range(w):
            for k in range(nruns):
                dy = runs[k, 0]
                lo = runs[k, 1]
                hi = runs[k, 2]
                sy = y - dy
                if sy < 0 or sy >= h:
                    continue
                c0 = x - hi
                c1 = x - lo
                if c0 < 0:
                    c0 = 0
                if c1 > w - 1:
                    c1 = w - 1
                if c0 > c1:
                    continue
                if p[sy, c1 + 1] - p[sy, c0] > 0:
                    out[y, x] = 1
                    break
    return out_arr


def erode_runs(const cnp.uint8_t[:, ::1] a, const cnp.int64_t[:, ::1] runs):
    cdef Py_ssize_t h = a.shape[0], w = a.shape[1], nruns = runs.shape[0]
    cdef Py_ssize_t y, x, k, sy, c0, c1
    cdef cnp.int64_t dy, lo, hi
    cdef bint ok
    cdef cnp.int32_t[:, ::1] p = _row_prefix(a)
    out_arr = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] out = out_arr
    for y in range(h):
        for x in range(w):
            ok = True
            for k in range(nruns):
                dy = runs[k, 0]
                lo = runs[k, 1]
                hi = runs[k, 2]
                sy = y + dy
                c0 = x + lo
                c1 = x + hi
                if sy < 0 or sy >= h or c0 < 0 or c1 > w - 1:
                    ok = False
                    break
                if p[sy, c1 + 1] - p[sy, c0] != c1 - c0 + 1:
                    ok = False
                    break
            if ok:
                out[y, x] = 1
    return out_arr


cdef inline double _env_at(const double[::1] env, double x, double x0, double res, Py_ssize_t w):
    cdef double f = (x - x0) / res
    cdef Py_ssize_t c
    if f <= 0:
        return env[0]
    if f >= w - 1:
        return env[w - 1]
    c = <Py_ssize_t>floor(f)
    f -= c
    return env[c] * (1.0 - f) + env[c + 1] * f


def footprint_penetration(
    const cnp.uint8_t[:, ::1] obstacle,
    const double[::1] envelope,
    double x0,
    double y0,
    double res,
    const double[:, ::1] poses,
    double half_length,
    double half_width,
):
    """Per pose: (penetration depth of the body, obstacle cells inside the rectangle).

    Cells count when their center lies inside the rectangle.  The depth is
    the body's exact top at every covered column center and at the four
    corners, measured above the envelope; between those points both curves
    are linear, so this is the deepest point of the body.
    """
    cdef Py_ssize_t h = obstacle.shape[0], w = obstacle.shape[1], n = poses.shape[0]
    cdef Py_ssize_t i, k, r, c, r0, r1, c0, c1
    cdef double px, py, ct, st, reach, cx, cy, u, v, d, best, top, xa, ya, xb, yb, lo, hi
    cdef double eps = 1e-9
    cdef double qx[4]
    cdef double qy[4]
    cdef double su[4]
    cdef double sv[4]
    cdef long hits
    su[0] = 1; sv[0] = 1
    su[1] = -1; sv[1] = 1
    su[2] = -1; sv[2] = -1
    su[3] = 1; sv[3] = -1
    depth_arr = np.zeros(n, dtype=np.float64)
    count_arr = np.zeros(n, dtype=np.int64)
    cdef double[::1] depth = depth_arr
    cdef cnp.int64_t[::1] count = count_arr
    reach = sqrt(half_length * half_length + half_width * half_width)
    for i in range(n):
        px = poses[i, 0]
        py = poses[i, 1]
        ct = cos(poses[i, 2])
        st = sin(poses[i, 2])
        best = 0.0
        lo = px
        hi = px
        for k in range(4):
            qx[k] = px + su[k] * half_length * ct - sv[k] * half_width * st
            qy[k] = py + su[k] * half_length * st + sv[k] * half_width * ct
            d = qy[k] - _env_at(envelope, qx[k], x0, res, w)
            if d > best:
                best = d
            if qx[k] < lo:
                lo = qx[k]
            if qx[k] > hi:
                hi = qx[k]
        c0 = <Py_ssize_t>ceil((lo - x0) / res - eps)
        c1 = <Py_ssize_t>floor((hi - x0) / res + eps)
        if c0 < 0:
            c0 = 0
        if c1 > w - 1:
            c1 = w - 1
        for c in range(c0, c1 + 1):
            cx = x0 + c * res
            top = -1e300
            for k in range(4):
                xa = qx[k]
                ya = qy[k]
                xb = qx[(k + 1) % 4]
                yb = qy[(k + 1) % 4]
                if xa > xb:
                    xa, xb = xb, xa
                    ya, yb = yb, ya
                if cx < xa - eps or cx > xb + eps:
                    continue
                if xb - xa < 1e-12:
                    u = ya if ya > yb else yb
                else:
                    u = ya + (yb - ya) * (cx - xa) / (xb - xa)
                if u > top:
                    top = u
            d = top - envelope[c]
            if d > best:
                best = d
        depth[i] = best

        c0 = <Py_ssize_t>floor((px - reach - x0) / res)
        c1 = <Py_ssize_t>ceil((px + reach - x0) / res)
        r0 = <Py_ssize_t>floor((py - reach - y0) / res)
        r1 = <Py_ssize_t>ceil((py + reach - y0) / res)
        if c0 < 0:
            c0 = 0
        if r0 < 0:
            r0 = 0
        if c1 > w - 1:
            c1 = w - 1
        if r1 > h - 1:
            r1 = h - 1
        hits = 0
        for r in range(r0, r1 + 1):
            cy = y0 + r * res
            for c in range(c0, c1 + 1):
                if obstacle[r, c] == 0:
                    continue
                cx = x0 + c * res
                u = (cx - px) * ct + (cy - py) * st
                v = -(cx - px) * st + (cy - py) * ct
                if fabs(u) <= half_length + eps and fabs(v) <= half_width + eps:
                    hits += 1
        count[i] = hits
    return depth_arr, count_arr


def swept_refine(
    const cnp.uint8_t[:, ::1] candidates,
    double x0,
    double y0,
    double res,
    const double[::1] xs,
    const double[::1] ys,
    double radius,
):
    """Keep candidate cells whose center lies within ``radius`` of the polyline.

    ``xs`` must be strictly increasing; only segments overlapping the cell's
    x-window of half-width ``radius`` are examined.
    """
    cdef Py_ssize_t h = candidates.shape[0], w = candidates.shape[1], n = xs.shape[0]
    cdef Py_ssize_t r, c, j, lo, hi, a, b, mid
    cdef double cx, cy, ax, ay, dx, dy, L2, t, px, py, r2 = radius * radius
    out_arr = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] out = out_arr
    for c in range(w):
        cx = x0 + c * res
        # first segment whose right end reaches cx - radius
        a = 0
        b = n - 1
        while a < b:
            mid = (a + b) // 2
            if xs[mid + 1 if mid + 1 < n else mid] < cx - radius:
                a = mid + 1
            else:
                b = mid
        lo = a
        hi = lo
        while hi + 1 < n and xs[hi + 1] <= cx + radius:
            hi += 1
        for r in range(h):
            if candidates[r, c] == 0:
                continue
            cy = y0 + r * res
            if n == 1:
                px = cx - xs[0]
                py = cy - ys[0]
                if px * px + py * py <= r2:
                    out[r, c] = 1
                continue
            for j in range(lo, hi + 1):
                if j >= n - 1:
                    break
                ax = xs[j]
                ay = ys[j]
                dx = xs[j + 1] - ax
                dy = ys[j + 1] - ay
                L2 = dx * dx + dy * dy
                t = ((cx - ax) * dx + (cy - ay) * dy) / L2
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
                px = ax + t * dx - cx
                py = ay + t * dy - cy
                if px * px + py * py <= r2:
                    out[r, c] = 1
                    break
    return out_arr
