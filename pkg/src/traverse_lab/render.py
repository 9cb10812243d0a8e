"""Deterministic SVG figures on a fixed canvas."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

SIZE = 600
PAD = 30
COLORS = {"+": "#1b7837", "-": "#b2182b", "path": "#4d4d4d", "grid": "#d9d9d9", "mark": "#2166ac"}


class Canvas:
    def __init__(self, bbox: Sequence[float], title: str = ""):
        xmin, xmax, ymin, ymax = bbox
        self.bbox = (xmin, xmax, ymin, ymax)
        span = max(xmax - xmin, ymax - ymin)
        self.scale = (SIZE - 2 * PAD) / span
        self.items: list[str] = []
        if title:
            self.items.append(f'<text x="{PAD}" y="20" font-family="monospace" font-size="13">{_esc(title)}</text>')

    def xy(self, x: float, y: float) -> tuple[str, str]:
        px = PAD + (x - self.bbox[0]) * self.scale
        py = SIZE - PAD - (y - self.bbox[2]) * self.scale
        return f"{px:.2f}", f"{py:.2f}"

    def polyline(self, pts: Iterable, color: str, width: float = 1.0, closed: bool = False) -> None:
        pts = list(pts)
        if len(pts) < 2:
            return
        coords = " ".join(",".join(self.xy(float(x), float(y))) for x, y in pts)
        tag = "polygon" if closed else "polyline"
        self.items.append(f'<{tag} points="{coords}" fill="none" stroke="{color}" stroke-width="{width}"/>')

    def dot(self, x: float, y: float, color: str, r: float = 3.0) -> None:
        px, py = self.xy(x, y)
        self.items.append(f'<circle cx="{px}" cy="{py}" r="{r}" fill="{color}"/>')

    def text(self, x: float, y: float, s: str, size: int = 11) -> None:
        px, py = self.xy(x, y)
        self.items.append(f'<text x="{px}" y="{py}" font-family="monospace" font-size="{size}">{_esc(s)}</text>')

    def rect(self, x0, y0, x1, y1, fill: str) -> None:
        ax, ay = self.xy(x0, y1)
        bx, by = self.xy(x1, y0)
        w = float(bx) - float(ax)
        h = float(by) - float(ay)
        self.items.append(f'<rect x="{ax}" y="{ay}" width="{w:.2f}" height="{h:.2f}" fill="{fill}"/>')

    def svg(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
                f'viewBox="0 0 {SIZE} {SIZE}">')
        body = "\n".join(self.items)
        return f'{head}\n<rect width="{SIZE}" height="{SIZE}" fill="white"/>\n{body}\n</svg>\n'


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def domain_svg(d, st, trajectories=(), title: str = "") -> str:
    """Boundary colored by stratum sign, tangency points, and some trajectories."""
    c = Canvas(d.bbox, title or d.name)
    for arc in st.arcs:
        curve = d.components[arc.component]
        L = curve.length
        span = arc.length(L)
        s = arc.s_start + np.linspace(0, span, max(8, int(256 * span / L)))
        c.polyline(curve.point(s), COLORS[arc.sign], 2.0)
    for tr in trajectories:
        c.polyline([(x, y) for (_, x, y) in tr.path], COLORS["path"], 0.6)
        for p in tr.divisor:
            if p.m == 2:
                c.dot(*p.xy, COLORS["mark"], 2.5)
    for p in st.points:
        c.dot(*p.xy, COLORS[p.stratum[1]], 4.0)
    return c.svg()


def alpha_svg(embedding: list[dict], title: str = "alpha(f, v)") -> str:
    """Trajectories as stacked f-intervals with their divisor marks."""
    if not embedding:
        return Canvas((0, 1, 0, 1), title).svg()
    lo = min(e["interval"][0] for e in embedding)
    hi = max(e["interval"][1] for e in embedding)
    n = len(embedding)
    pad = 0.05 * (hi - lo or 1)
    c = Canvas((lo - pad, hi + pad, -1, n), title)
    for k, e in enumerate(embedding):
        a, b = e["interval"]
        c.polyline([(a, k), (b, k)], COLORS["path"], 1.0)
        for val, m in zip(e["marks"], e["omega"]):
            c.dot(val, k, COLORS["mark"] if m == "2" else COLORS["path"], 2.0 if m == "1" else 3.0)
    return c.svg()


def gv_svg(gv: dict, lengths: Sequence[float], title: str = "G_v") -> str:
    """Occupied blocks of the arcs-by-arcs board and the sampled graph of s -> C(s)."""
    plus = gv["plus_arcs"]
    minus = gv["minus_arcs"]
    nx, ny = max(len(plus), 1), max(len(minus), 1)
    c = Canvas((0, nx, 0, ny), title)
    for i, j in gv["blocks"]:
        c.rect(i, j, i + 1, j + 1, "#f0f0f0")
    for i in range(nx + 1):
        c.polyline([(i, 0), (i, ny)], COLORS["grid"], 0.5)
    for j in range(ny + 1):
        c.polyline([(0, j), (nx, j)], COLORS["grid"], 0.5)
    for i, pts in enumerate(gv["curves"]):
        arc = plus[i]
        L = lengths[arc["component"]]
        span = (arc["s_end"] - arc["s_start"]) % L or L
        for p in pts:
            j = p["block"][1]
            m = minus[j]
            Lm = lengths[m["component"]]
            mspan = (m["s_end"] - m["s_start"]) % Lm or Lm
            u = ((p["s"] - arc["s_start"]) % L) / span
            w = ((p["image_s"] - m["s_start"]) % Lm) / mspan
            c.dot(i + u, j + w, COLORS["path"], 0.8)
    return c.svg()


def billiard_svg(table, states=(), chords=(), title: str = "") -> str:
    pts = np.vstack([cv.samples(256) for cv in table.curves])
    xmin, ymin = pts.min(axis=0)
    xmax, ymax = pts.max(axis=0)
    m = 0.05 * max(xmax - xmin, ymax - ymin)
    c = Canvas((xmin - m, xmax + m, ymin - m, ymax + m), title or table.name)
    for cv in table.curves:
        c.polyline(cv.samples(256), "#000000", 1.5, closed=True)
    for a, b in chords:
        c.polyline([a, b], COLORS["path"], 0.5)
    for s in states:
        c.dot(*s.xy, COLORS["mark"], 2.0)
    return c.svg()
