"""Ground-truth simulation of traversing flows on planar domains.

A domain is ``{w >= 0}`` for a boundary function ``w`` given as an
expression.  Boundary strata are labelled by the sign of the first
nonvanishing Lie derivative ``L_v^(j) w``: ``+`` means the flow enters
(``j = 1``) or touches from inside (``j = 2``), ``-`` means it leaves or
touches from outside, so singleton trajectories sit on ``(2, -)`` points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from .errors import Degenerate, MonotonicityViolation, TimeBudgetExceeded
from .field_expr import Expr, VectorField, as_expr, gradient, lie_jet, lie_jet_batch
from .integrate import Controls, TraceResult, field_values, trace_batch
from .omega import OmegaWord, is_admissible

G_MIN = 1e-6
TAU_LIE = 1e-6


# ------------------------------------------------------------ boundary curves

class BoundaryCurve:
    """Closed component of ``{w = 0}`` with an arc-length parameterization.

    Oriented with the domain on the left.  ``s = 0`` is the rightmost point.
    """

    def __init__(self, w: Expr, samples: np.ndarray, length: float):
        self.w = w
        pts = np.asarray(samples, dtype=float)
        self.length = float(length)
        n = len(pts)
        self.s_grid = np.arange(n) * (self.length / n)
        closed = np.vstack([pts, pts[:1]])
        s_closed = np.append(self.s_grid, self.length)
        self._spline = CubicSpline(s_closed, closed, bc_type="periodic")
        self.samples = pts
        self._tree = cKDTree(pts)

    def __len__(self):
        return len(self.samples)

    def point(self, s, project: bool = True) -> np.ndarray:
        s = np.mod(np.asarray(s, dtype=float), self.length)
        p = self._spline(s)
        if project:
            p = project_to_zero_set(self.w, p)
        return p

    def tangent(self, s) -> np.ndarray:
        s = np.mod(np.asarray(s, dtype=float), self.length)
        d = self._spline(s, 1)
        return d / np.linalg.norm(d, axis=-1, keepdims=True)

    def distance(self, p) -> np.ndarray:
        d, _ = self._tree.query(np.atleast_2d(p))
        return d

    def locate(self, p) -> np.ndarray:
        """Arc-length of the closest curve point to each query point."""
        p = np.atleast_2d(np.asarray(p, dtype=float))
        _, k = self._tree.query(p)
        s = self.s_grid[k].astype(float)
        for _ in range(6):
            c = self._spline(s)
            d1 = self._spline(s, 1)
            d2 = self._spline(s, 2)
            r = c - p
            num = np.sum(r * d1, axis=1)
            den = np.sum(d1 * d1, axis=1) + np.sum(r * d2, axis=1)
            step = np.where(den != 0, num / np.where(den != 0, den, 1.0), 0.0)
            s = s - np.clip(step, -self.length / len(self), self.length / len(self))
        return np.mod(s, self.length)

    def arc_delta(self, s0, s1):
        """Signed shortest arc-length difference ``s1 - s0`` on the circle."""
        d = np.mod(np.asarray(s1) - np.asarray(s0) + self.length / 2, self.length) - self.length / 2
        return d


def project_to_zero_set(w: Expr, p, iters: int = 4) -> np.ndarray:
    p = np.array(p, dtype=float)
    flat = p.reshape(-1, 2)
    x, y = flat[:, 0].copy(), flat[:, 1].copy()
    for _ in range(iters):
        val = np.broadcast_to(np.asarray(w(x, y), dtype=float), x.shape)
        gx, gy = gradient(w, x, y)
        g2 = gx * gx + gy * gy
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.where(g2 > 0, val / g2, 0.0)
        x = x - f * gx
        y = y - f * gy
    return np.stack([x, y], axis=-1).reshape(p.shape)


def _trace_component(w: Expr, seed: np.ndarray, h: float, bbox, max_steps: int = 200000):
    p = project_to_zero_set(w, seed)
    start = p.copy()
    pts = [p]
    traveled = 0.0
    for _ in range(max_steps):
        gx, gy = gradient(w, p[0], p[1])
        gx, gy = float(gx), float(gy)
        gn = math.hypot(gx, gy)
        if gn < G_MIN:
            raise Degenerate(f"0 is not a regular value of w near {p}")
        t = np.array([gy, -gx]) / gn
        q = project_to_zero_set(w, p + h * t, iters=3)
        traveled += float(np.linalg.norm(q - p))
        p = q
        if not (bbox[0] - h <= p[0] <= bbox[1] + h and bbox[2] - h <= p[1] <= bbox[3] + h):
            raise ValueError("boundary curve leaves the bounding box")
        if traveled > 4 * h and np.linalg.norm(p - start) < 0.75 * h:
            return np.array(pts)
        pts.append(p)
    raise ValueError("boundary curve did not close")


def trace_boundary(w: Expr, bbox, resolution: int = 2048, grid: int = 160) -> list[BoundaryCurve]:
    """Components of ``{w = 0}`` by grid seeding and predictor-corrector continuation."""
    xmin, xmax, ymin, ymax = bbox
    xs = np.linspace(xmin, xmax, grid)
    ys = np.linspace(ymin, ymax, grid)
    X, Y = np.meshgrid(xs, ys)
    W = np.broadcast_to(np.asarray(w(X, Y), dtype=float), X.shape)
    sign = W >= 0
    seeds = []
    rows, cols = np.nonzero(sign[:, :-1] != sign[:, 1:])
    for r, c in zip(rows, cols):
        a, b = xs[c], xs[c + 1]
        fa = W[r, c]
        for _ in range(60):
            mid = 0.5 * (a + b)
            fm = float(w(mid, ys[r]))
            if (fm >= 0) == (fa >= 0):
                a, fa = mid, fm
            else:
                b = mid
        seeds.append((0.5 * (a + b), ys[r]))
    seeds = np.array(seeds).reshape(-1, 2)
    diam = math.hypot(xmax - xmin, ymax - ymin)
    h = diam / 800
    cell = max((xmax - xmin), (ymax - ymin)) / (grid - 1)
    used = np.zeros(len(seeds), dtype=bool)
    polylines = []
    for i in range(len(seeds)):
        if used[i]:
            continue
        poly = _trace_component(w, seeds[i], h, bbox)
        tree = cKDTree(poly)
        d, _ = tree.query(seeds)
        used |= d <= 2 * max(cell, h)
        polylines.append(poly)
    curves = [_resample(w, poly, resolution) for poly in polylines]
    curves.sort(key=lambda c: (-round(c.length, 9), round(float(c.samples[0, 0]), 9),
                               round(float(c.samples[0, 1]), 9)))
    return curves


def _arc_lengths(spl: CubicSpline, knots: np.ndarray) -> np.ndarray:
    """Cumulative arc length at the knots (Gauss-Legendre per interval)."""
    nodes, weights = np.polynomial.legendre.leggauss(6)
    a, b = knots[:-1], knots[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    tq = mid[:, None] + half[:, None] * nodes[None, :]
    speed = np.linalg.norm(spl(tq, 1), axis=-1)
    seg = half * (speed * weights).sum(axis=1)
    return np.concatenate([[0.0], np.cumsum(seg)])


def _periodic_spline(pts: np.ndarray) -> CubicSpline:
    closed = np.vstack([pts, pts[:1]])
    chord = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(closed, axis=0).T))])
    return CubicSpline(chord, closed, bc_type="periodic")


def _resample(w: Expr, poly: np.ndarray, resolution: int) -> BoundaryCurve:
    spl = _periodic_spline(poly)
    total = spl.x[-1]
    dense = project_to_zero_set(w, spl(np.linspace(0, total, resolution * 8, endpoint=False)))
    spl = _periodic_spline(dense)
    total = spl.x[-1]
    # origin at the rightmost point, refined by Newton on d x / dc = 0
    c0 = spl.x[int(np.lexsort((-dense[:, 1], -dense[:, 0]))[0])]
    for _ in range(8):
        d1, d2 = spl(c0, 1)[0], spl(c0, 2)[0]
        if d2 == 0:
            break
        c0 = c0 - d1 / d2
    c0 %= total
    knots = spl.x
    cum = _arc_lengths(spl, knots)
    length = float(cum[-1])
    s_origin = float(np.interp(c0, knots, cum))
    s_target = (s_origin + np.arange(resolution) * length / resolution) % length
    c = np.interp(s_target, cum, knots)
    # Newton on s(c) = s_target; s(c) evaluated by quadrature from the knot below
    for _ in range(3):
        k = np.clip(np.searchsorted(knots, c, side="right") - 1, 0, len(knots) - 2)
        s_c = cum[k] + _partial_length(spl, knots[k], c)
        diff = (s_target - s_c + length / 2) % length - length / 2
        c = c + diff / np.linalg.norm(spl(c, 1), axis=-1)
    samples = project_to_zero_set(w, spl(c % total))
    return BoundaryCurve(w, samples, length)


def _partial_length(spl: CubicSpline, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    nodes, weights = np.polynomial.legendre.leggauss(6)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    tq = mid[:, None] + half[:, None] * nodes[None, :]
    return half * (np.linalg.norm(spl(tq, 1), axis=-1) * weights).sum(axis=1)


# ------------------------------------------------------------------- domain

@dataclass(frozen=True)
class BoundaryPoint:
    component: int
    s: float
    xy: tuple[float, float]
    stratum: tuple[int, str] | None = None
    m: int = 1

    def as_dict(self):
        return {"component": self.component, "s": self.s, "x": self.xy[0], "y": self.xy[1],
                "j": None if self.stratum is None else self.stratum[0],
                "sign": None if self.stratum is None else self.stratum[1], "m": self.m}


class Domain2D:
    def __init__(self, w, bbox: Sequence[float], resolution: int = 2048, name: str = "domain"):
        self.w = as_expr(w)
        self.bbox = tuple(float(b) for b in bbox)
        self.name = name
        self.resolution = resolution
        self.components = trace_boundary(self.w, self.bbox, resolution)
        if not self.components:
            raise ValueError("no boundary found in the bounding box")
        allpts = np.vstack([c.samples for c in self.components])
        ext = allpts.max(axis=0) - allpts.min(axis=0)
        self.diam = float(np.hypot(*ext))
        self.tau_bnd = 1e-9 * self.diam
        self.tau_graze = 1e-7 * self.diam
        self._check()

    def _check(self):
        for c in self.components:
            gx, gy = gradient(self.w, c.samples[:, 0], c.samples[:, 1])
            if np.min(np.hypot(gx, gy)) < G_MIN:
                raise Degenerate("0 is not a regular value of w on the boundary")
        xmin, xmax, ymin, ymax = self.bbox
        gx, gy = np.meshgrid(np.linspace(xmin, xmax, 64), np.linspace(ymin, ymax, 64))
        if not np.any(np.asarray(self.w(gx, gy)) > 0):
            raise ValueError("w has no interior witness (w > 0) on the box")

    def __repr__(self):
        return f"Domain2D({self.name!r}, components={len(self.components)})"

    def locate(self, p) -> tuple[int, float]:
        p = np.asarray(p, dtype=float)
        dists = [float(c.distance(p)[0]) for c in self.components]
        k = int(np.argmin(dists))
        return k, float(self.components[k].locate(p)[0])

    def locate_many(self, pts) -> tuple[np.ndarray, np.ndarray]:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if len(pts) == 0:
            return np.zeros(0, dtype=int), np.zeros(0)
        d = np.stack([c.distance(pts) for c in self.components])
        comp = np.argmin(d, axis=0)
        s = np.zeros(len(pts))
        for k, c in enumerate(self.components):
            sel = comp == k
            if np.any(sel):
                s[sel] = c.locate(pts[sel])
        return comp, s

    def point(self, component: int, s) -> np.ndarray:
        return self.components[component].point(s)

    def boundary_point(self, component: int, s: float, v: VectorField | None = None, m: int = 1):
        xy = self.point(component, s)
        stratum = classify_boundary_point(self, v, xy) if v is not None else None
        return BoundaryPoint(component, float(s), (float(xy[0]), float(xy[1])), stratum, m)

    def interior_samples(self, n: int, rng: np.random.Generator) -> np.ndarray:
        xmin, xmax, ymin, ymax = self.bbox
        out = []
        while sum(len(o) for o in out) < n:
            cand = np.column_stack([rng.uniform(xmin, xmax, 4 * n), rng.uniform(ymin, ymax, 4 * n)])
            val = np.asarray(self.w(cand[:, 0], cand[:, 1]))
            out.append(cand[val > 1e-6 * self.diam])
        return np.vstack(out)[:n]

    def default_controls(self, v: VectorField, **overrides) -> Controls:
        speeds = self._speeds(v)
        vmax = float(np.max(speeds))
        vmed = float(np.median(speeds))
        if vmax == 0:
            raise ValueError("field vanishes on the domain")
        c = Controls(
            max_step=0.04 * self.diam / vmax,
            t_max=20 * self.diam / max(vmed, 1e-12),
            graze_tol=self.tau_graze,
            start_exclusion=10 * self.tau_graze,
        )
        for k, val in overrides.items():
            setattr(c, k, val)
        return c

    def _speeds(self, v: VectorField) -> np.ndarray:
        xmin, xmax, ymin, ymax = self.bbox
        gx, gy = np.meshgrid(np.linspace(xmin, xmax, 32), np.linspace(ymin, ymax, 32))
        gx, gy = gx.ravel(), gy.ravel()
        inside = np.asarray(self.w(gx, gy)) >= 0
        fx, fy = field_values(v, gx[inside], gy[inside])
        return np.hypot(fx, fy)


# ----------------------------------------------------------- classification

def classify_boundary_point(d: Domain2D, v, p) -> tuple[int, str]:
    """Stratum ``(j, sign)`` of a boundary point."""
    v = VectorField.of(v)
    p = (float(p[0]), float(p[1]))
    gx, gy = gradient(d.w, p[0], p[1])
    gn = float(math.hypot(gx, gy))
    val = float(d.w(*p))
    if abs(val) / gn > max(d.tau_bnd, 1e-12):
        raise ValueError(f"point {p} is not on the boundary (w = {val:.3g})")
    jets = lie_jet(d.w, v, p, 4)
    fx, fy = field_values(v, np.array(p[0]), np.array(p[1]))
    speed = float(np.hypot(fx, fy))
    for k in range(1, 5):
        scale = gn * speed ** k / d.diam ** (k - 1)
        if abs(jets[k]) > TAU_LIE * scale:
            return k, "+" if jets[k] > 0 else "-"
    raise Degenerate(f"no Lie derivative of order <= 4 is resolvable at {p}")


# ------------------------------------------------------------ trajectories

@dataclass
class Trajectory:
    entry: BoundaryPoint
    divisor: list[BoundaryPoint]
    path: list[tuple[float, float, float]] = field(default_factory=list)
    transit_time: float = 0.0
    status: str = "exit"

    @property
    def omega(self) -> OmegaWord:
        return OmegaWord(tuple(p.m for p in self.divisor))

    @property
    def exit(self) -> BoundaryPoint:
        return self.divisor[-1]

    @property
    def is_singleton(self) -> bool:
        return len(self.divisor) == 1

    def as_dict(self):
        return {"omega": str(self.omega), "transit_time": self.transit_time, "status": self.status,
                "divisor": [p.as_dict() for p in self.divisor]}


def _result_to_divisor(d: Domain2D, entry: BoundaryPoint, res: TraceResult) -> list[BoundaryPoint]:
    pts = [entry]
    evs = [e for e in res.events]
    if evs:
        comps, ss = d.locate_many([e.point for e in evs])
        for e, c, s in zip(evs, comps, ss):
            if e.kind == "graze":
                pts.append(BoundaryPoint(int(c), float(s), e.point, (2, "+"), 2))
            else:
                pts.append(BoundaryPoint(int(c), float(s), e.point, (1, "-"), 1))
    return pts


def trace_many(d: Domain2D, v, entries: Sequence[BoundaryPoint], controls: Controls | None = None,
               strict: bool = False) -> list[Trajectory]:
    """Trace trajectories from ``(1, +)`` entry points in one batch."""
    v = VectorField.of(v)
    controls = controls or d.default_controls(v)
    results = trace_batch(d.w, v, [e.xy for e in entries], controls)
    out = []
    for e, res in zip(entries, results):
        if strict and res.status == "timeout":
            raise TimeBudgetExceeded(f"trajectory from {e.xy} did not exit")
        if strict and res.status == "degenerate":
            raise Degenerate(f"tangency of order >= 3 on the trajectory from {e.xy}")
        out.append(Trajectory(e, _result_to_divisor(d, e, res), res.path or [], res.t_end, res.status))
    return out


def trace_trajectory(d: Domain2D, v, entry, controls: Controls | None = None) -> Trajectory:
    """Full trajectory through an entry point (``(1,+)``, ``(2,+)`` or a ``(2,-)`` singleton)."""
    v = VectorField.of(v)
    if not isinstance(entry, BoundaryPoint):
        c, s = d.locate(entry)
        entry = BoundaryPoint(c, s, (float(entry[0]), float(entry[1])))
    stratum = entry.stratum or classify_boundary_point(d, v, entry.xy)
    controls = controls or d.default_controls(v, record_path=True)
    if stratum == (2, "-"):
        p = BoundaryPoint(entry.component, entry.s, entry.xy, stratum, 2)
        return Trajectory(p, [p], [(0.0, *entry.xy)], 0.0, "singleton")
    if stratum[1] != "+" or stratum[0] > 2:
        if stratum[0] > 2:
            raise Degenerate(f"boundary point {entry.xy} has multiplicity {stratum[0]}")
        raise ValueError(f"{entry.xy} is an exit point, not an entry")
    head: list[BoundaryPoint] = []
    head_path: list = []
    t_shift = 0.0
    if stratum[0] == 2:
        back = trace_batch(d.w, -v, [entry.xy], controls)[0]
        _raise_for(back, entry)
        ev = back.exit
        c, s = d.locate(ev.point)
        first = BoundaryPoint(c, s, ev.point, (1, "+"), 1)
        mids = [e for e in back.grazes][::-1]
        head = [first]
        for g in mids:
            gc, gs = d.locate(g.point)
            head.append(BoundaryPoint(gc, gs, g.point, (2, "+"), 2))
        t_shift = back.t_end
        if back.path:
            head_path = [(t_shift - t, x, y) for (t, x, y) in reversed(back.path)][:-1]
        entry = BoundaryPoint(entry.component, entry.s, entry.xy, stratum, 2)
    else:
        entry = BoundaryPoint(entry.component, entry.s, entry.xy, stratum, 1)
    res = trace_batch(d.w, v, [entry.xy], controls)[0]
    _raise_for(res, entry)
    tail = _result_to_divisor(d, entry, res)
    path = head_path + [(t + t_shift, x, y) for (t, x, y) in (res.path or [])]
    divisor = head + tail
    start = divisor[0]
    return Trajectory(start, divisor, path, res.t_end + t_shift, res.status)


def _raise_for(res: TraceResult, entry: BoundaryPoint):
    if res.status == "timeout":
        raise TimeBudgetExceeded(f"trajectory through {entry.xy} did not exit")
    if res.status == "degenerate":
        raise Degenerate(f"non-generic tangency on the trajectory through {entry.xy}")


# ------------------------------------------------------------------- strata

@dataclass(frozen=True)
class Arc:
    component: int
    s_start: float
    s_end: float
    sign: str
    closed: bool = False

    def length(self, curve_length: float) -> float:
        if self.closed:
            return curve_length
        return (self.s_end - self.s_start) % curve_length

    def contains(self, s: float, curve_length: float) -> bool:
        if self.closed:
            return True
        return (s - self.s_start) % curve_length <= self.length(curve_length)

    def as_dict(self):
        return {"component": self.component, "s_start": self.s_start, "s_end": self.s_end,
                "sign": self.sign, "closed": self.closed}


@dataclass
class Strata:
    arcs: list[Arc]
    points: list[BoundaryPoint]  # j = 2 points with their sign

    def arcs_with_sign(self, sign: str) -> list[Arc]:
        return [a for a in self.arcs if a.sign == sign]

    def points_with_sign(self, sign: str) -> list[BoundaryPoint]:
        return [p for p in self.points if p.stratum[1] == sign]

    def euler_characteristic(self) -> int:
        # open arcs contribute 1 each, closed circles 0
        arcs = sum(1 for a in self.arcs_with_sign("+") if not a.closed)
        return arcs - len(self.points_with_sign("+"))

    def as_dict(self):
        return {"arcs": [a.as_dict() for a in self.arcs],
                "points": [p.as_dict() for p in self.points]}


def strata(d: Domain2D, v, N: int | None = None) -> Strata:
    """Morse strata of the boundary: signed arcs and the tangency points between them."""
    v = VectorField.of(v)
    N = d.resolution if N is None else N
    if N < 16:
        raise ValueError("need at least 16 samples per component")
    arcs: list[Arc] = []
    points: list[BoundaryPoint] = []
    for ci, curve in enumerate(d.components):
        s = np.arange(N) * curve.length / N
        p = curve.point(s)
        g = lie_jet_batch(d.w, v, p[:, 0], p[:, 1], 1)[1]
        neg = g < 0
        flips = np.flatnonzero(neg != np.roll(neg, -1))
        roots = []
        if flips.size:
            lo = s[flips]
            hi = lo + curve.length / N
            lo_neg = neg[flips]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                pm = curve.point(mid)
                gm = lie_jet_batch(d.w, v, pm[:, 0], pm[:, 1], 1)[1]
                same = (gm < 0) == lo_neg
                lo = np.where(same, mid, lo)
                hi = np.where(same, hi, mid)
            roots = sorted(float(r) % curve.length for r in 0.5 * (lo + hi))
        comp_points = []
        for r in roots:
            xy = curve.point(r)
            j, sign = classify_boundary_point(d, v, xy)
            if j != 2:
                raise Degenerate(f"boundary tangency of order {j} at {tuple(xy)}")
            comp_points.append(BoundaryPoint(ci, r, (float(xy[0]), float(xy[1])), (j, sign), 2))
        points.extend(comp_points)
        if not roots:
            arcs.append(Arc(ci, 0.0, curve.length, "-" if neg[0] else "+", closed=True))
            continue
        for a, b in zip(roots, roots[1:] + roots[:1]):
            mid = a + ((b - a) % curve.length) / 2
            pm = curve.point(mid)
            gm = float(lie_jet(d.w, v, pm, 1)[1])
            arcs.append(Arc(ci, a, b, "+" if gm > 0 else "-"))
    return Strata(arcs, points)


# --------------------------------------------------------- traversing check

@dataclass
class TraversingReport:
    passed: bool
    samples: int
    failures: list[dict]
    max_time: float

    def as_dict(self):
        return {"passed": self.passed, "samples": self.samples, "failures": self.failures,
                "max_time": self.max_time}


def check_traversing(d: Domain2D, v, M: int = 100, seed: int = 0,
                     t_budget: float | None = None) -> TraversingReport:
    v = VectorField.of(v)
    rng = np.random.default_rng(seed)
    pts = d.interior_samples(M, rng)
    controls = d.default_controls(v)
    if t_budget is not None:
        controls.t_max = t_budget
    failures = []
    max_time = 0.0
    for label, field_ in (("forward", v), ("backward", -v)):
        for p, res in zip(pts, trace_batch(d.w, field_, pts, controls)):
            if res.status != "exit":
                failures.append({"point": [float(p[0]), float(p[1])], "direction": label,
                                 "status": res.status})
            else:
                max_time = max(max_time, res.t_end)
    return TraversingReport(not failures, len(pts), failures, max_time)


# ---------------------------------------------------------------- embedding

def embed_alpha(trajectories: Sequence[Trajectory], f, v) -> list[dict]:
    """Place each trajectory as an interval of values of a height function f."""
    f = as_expr(f)
    v = VectorField.of(v)
    out = []
    for i, tr in enumerate(trajectories):
        pts = [(x, y) for (_, x, y) in tr.path] or [p.xy for p in tr.divisor]
        pts = np.asarray(pts + [p.xy for p in tr.divisor], dtype=float)
        df = lie_jet_batch(f, v, pts[:, 0], pts[:, 1], 1)[1]
        if np.any(df <= 0):
            raise MonotonicityViolation(f"L_v f <= 0 on trajectory {i}")
        vals = [float(f(*p.xy)) for p in tr.divisor]
        out.append({"trajectory": i, "interval": (vals[0], vals[-1]), "marks": vals,
                    "omega": str(tr.omega)})
    return out


def is_generic_word(w: OmegaWord) -> bool:
    return is_admissible(w) and all(m <= 2 for m in w)
