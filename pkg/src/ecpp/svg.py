"""Minimal deterministic SVG plotting: stacked panels of lines, fills, boxes and bars."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

PALETTE = {
    "boundary": "#c9a000",
    "preprocessed": "#555555",
    "obstacle": "#e8d9a0",
    "dilated": "#f2c94c",
    "closed": "#b8b8b8",
    "mow": "#9b59b6",
    "small": "#27ae60",
    "big": "#c0392b",
    "bsdp": "#e67e22",
    "scp": "#2c7be5",
    "tracked": "#1f3fbf",
    "reference": "#27ae60",
}


def _f(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 10))
        t += step
    return ticks


@dataclass
class Panel:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    equal: bool = False
    height: float = 220.0
    items: list = field(default_factory=list)
    xlim: tuple | None = None
    ylim: tuple | None = None

    def line(self, xs, ys, color="#000", width=1.5, label=None, dash=None):
        self.items.append(("line", np.asarray(xs, float), np.asarray(ys, float), color, width, label, dash))

    def fill_above(self, xs, ys, top, color, label=None):
        """Region between the curve and ``top`` (used for obstacles)."""
        xs = np.asarray(xs, float)
        ys = np.asarray(ys, float)
        px = np.concatenate([xs, xs[::-1]])
        py = np.concatenate([ys, np.full(xs.size, top)])
        self.items.append(("poly", px, py, color, label))

    def polygon(self, xs, ys, color, opacity=0.25, stroke=None):
        self.items.append(("shape", np.asarray(xs, float), np.asarray(ys, float), color, opacity, stroke))

    def bars(self, labels, values, colors):
        self.items.append(("bars", list(labels), [float(v) for v in values], list(colors)))

    def _bounds(self):
        if self.items and self.items[0][0] == "bars":
            vals = self.items[0][2]
            return (-0.5, len(vals) - 0.5, 0.0, max(vals + [1e-9]) * 1.15)
        xs, ys = [], []
        for it in self.items:
            if it[0] in ("line", "poly", "shape"):
                xs.append(it[1][np.isfinite(it[1])])
                ys.append(it[2][np.isfinite(it[2])])
        x = np.concatenate(xs) if xs else np.array([0.0, 1.0])
        y = np.concatenate(ys) if ys else np.array([0.0, 1.0])
        x0, x1 = self.xlim or (float(x.min()), float(x.max()))
        y0, y1 = self.ylim or (float(y.min()), float(y.max()))
        if x1 <= x0:
            x1 = x0 + 1.0
        if y1 <= y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        pad = 0.04 * (y1 - y0)
        return x0, x1, y0 - pad, y1 + pad


class Figure:
    def __init__(self, width: float = 900.0, title: str = ""):
        self.width = width
        self.title = title
        self.panels: list[Panel] = []

    def panel(self, **kw) -> Panel:
        p = Panel(**kw)
        self.panels.append(p)
        return p

    def render(self) -> str:
        ml, mr, mt, mb = 70.0, 150.0, 34.0, 44.0
        pw = self.width - ml - mr
        heights = []
        for p in self.panels:
            if p.equal:
                x0, x1, y0, y1 = p._bounds()
                heights.append(max(min(pw * (y1 - y0) / (x1 - x0), 600.0), 60.0))
            else:
                heights.append(p.height)
        total = 30.0 + sum(h + mt + mb for h in heights)
        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(self.width)}" height="{_f(total)}" '
            f'viewBox="0 0 {_f(self.width)} {_f(total)}" font-family="sans-serif" font-size="11">',
            '<rect width="100%" height="100%" fill="white"/>',
        ]
        if self.title:
            out.append(f'<text x="{_f(self.width / 2)}" y="20" text-anchor="middle" font-size="14">'
                       f"{escape(self.title)}</text>")
        top = 30.0
        for p, ph in zip(self.panels, heights):
            out.extend(self._panel(p, ml, top + mt, pw, ph))
            top += ph + mt + mb
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def _panel(self, p: Panel, ox: float, oy: float, pw: float, ph: float) -> list[str]:
        x0, x1, y0, y1 = p._bounds()

        def X(v):
            return ox + (v - x0) / (x1 - x0) * pw

        def Y(v):
            return oy + ph - (v - y0) / (y1 - y0) * ph

        clip = f"clip{int(ox)}_{int(oy)}"
        s = [f'<clipPath id="{clip}"><rect x="{_f(ox)}" y="{_f(oy)}" width="{_f(pw)}" height="{_f(ph)}"/></clipPath>']
        if p.title:
            s.append(f'<text x="{_f(ox)}" y="{_f(oy - 8)}" font-size="12">{escape(p.title)}</text>')
        s.append(f'<g clip-path="url(#{clip})">')
        legend = []
        for it in p.items:
            kind = it[0]
            if kind == "line":
                _, xs, ys, color, width, label, dash = it
                ok = np.isfinite(xs) & np.isfinite(ys)
                pts = " ".join(f"{_f(X(a))},{_f(Y(b))}" for a, b in zip(xs[ok], ys[ok]))
                d = f' stroke-dasharray="{dash}"' if dash else ""
                s.append(f'<polyline fill="none" stroke="{color}" stroke-width="{width}"{d} points="{pts}"/>')
                if label:
                    legend.append((label, color))
            elif kind == "poly":
                _, xs, ys, color, label = it
                pts = " ".join(f"{_f(X(a))},{_f(Y(b))}" for a, b in zip(xs, ys))
                s.append(f'<polygon fill="{color}" stroke="none" points="{pts}"/>')
                if label:
                    legend.append((label, color))
            elif kind == "shape":
                _, xs, ys, color, opacity, stroke = it
                pts = " ".join(f"{_f(X(a))},{_f(Y(b))}" for a, b in zip(xs, ys))
                st = f'stroke="{stroke}" stroke-width="0.5"' if stroke else 'stroke="none"'
                s.append(f'<polygon fill="{color}" fill-opacity="{opacity}" {st} points="{pts}"/>')
            elif kind == "bars":
                _, labels, values, colors = it
                for i, (lab, v, c) in enumerate(zip(labels, values, colors)):
                    bx0, bx1 = X(i - 0.35), X(i + 0.35)
                    s.append(f'<rect x="{_f(bx0)}" y="{_f(Y(v))}" width="{_f(bx1 - bx0)}" '
                             f'height="{_f(Y(0) - Y(v))}" fill="{c}"/>')
                    s.append(f'<text x="{_f((bx0 + bx1) / 2)}" y="{_f(Y(v) - 4)}" text-anchor="middle">'
                             f"{v:.4f}</text>")
        s.append("</g>")
        s.append(f'<rect x="{_f(ox)}" y="{_f(oy)}" width="{_f(pw)}" height="{_f(ph)}" fill="none" stroke="#333"/>')
        bars = p.items and p.items[0][0] == "bars"
        if bars:
            for i, lab in enumerate(p.items[0][1]):
                s.append(f'<text x="{_f(X(i))}" y="{_f(oy + ph + 16)}" text-anchor="middle">{escape(lab)}</text>')
        else:
            for t in _nice_ticks(x0, x1):
                s.append(f'<line x1="{_f(X(t))}" y1="{_f(oy + ph)}" x2="{_f(X(t))}" y2="{_f(oy + ph + 4)}" stroke="#333"/>')
                s.append(f'<text x="{_f(X(t))}" y="{_f(oy + ph + 16)}" text-anchor="middle">{t:g}</text>')
        for t in _nice_ticks(y0, y1, 4):
            s.append(f'<line x1="{_f(ox - 4)}" y1="{_f(Y(t))}" x2="{_f(ox)}" y2="{_f(Y(t))}" stroke="#333"/>')
            s.append(f'<text x="{_f(ox - 6)}" y="{_f(Y(t) + 4)}" text-anchor="end">{t:g}</text>')
        if p.xlabel:
            s.append(f'<text x="{_f(ox + pw / 2)}" y="{_f(oy + ph + 32)}" text-anchor="middle">{escape(p.xlabel)}</text>')
        if p.ylabel:
            s.append(f'<text x="{_f(ox - 50)}" y="{_f(oy + ph / 2)}" text-anchor="middle" '
                     f'transform="rotate(-90 {_f(ox - 50)} {_f(oy + ph / 2)})">{escape(p.ylabel)}</text>')
        for k, (label, color) in enumerate(legend):
            ly = oy + 12 + 16 * k
            lx = ox + pw + 12
            s.append(f'<line x1="{_f(lx)}" y1="{_f(ly - 4)}" x2="{_f(lx + 18)}" y2="{_f(ly - 4)}" stroke="{color}" stroke-width="3"/>')
            s.append(f'<text x="{_f(lx + 24)}" y="{_f(ly)}">{escape(label)}</text>')
        return s

    def save(self, path) -> None:
        Path(path).write_text(self.render())
