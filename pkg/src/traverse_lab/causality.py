"""Discrete causality map on sampled boundary data.

``C_v`` sends a point of the entry locus to the next point of its trajectory
on the boundary.  A table holds one row per sampled arrow: sampled entries,
preimages of interior tangencies, continuation rows keyed by the tangency
points themselves, and ``FIXED`` rows at singleton tangencies.
"""

from __future__ import annotations

import csv
import graphlib
import io
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .field_expr import Expr, VectorField, as_expr, lie_jet_batch
from .flow_sim import (BoundaryPoint, Domain2D, Strata, Trajectory, strata, trace_many,
                       trace_trajectory)
from .local_model import FIXED, LocalModel
from .omega import OmegaWord

KIND_ORDER = {"sample": 0, "preimage": 1, "continuation": 2, "fixed": 3}
MATCH_TOL = 1e-9  # rows of one traced trajectory share exact coordinates


@dataclass
class Row:
    entry: BoundaryPoint
    image: BoundaryPoint | None  # None means FIXED
    kind: str
    word: str
    trajectory: int
    step: int
    transit_time: float = 0.0
    arc: int | None = None
    f_entry: float | None = None
    f_image: float | None = None

    @property
    def is_fixed(self) -> bool:
        return self.image is None

    def as_dict(self) -> dict:
        img = self.image
        return {
            "kind": self.kind,
            "component": self.entry.component, "s": self.entry.s,
            "x": self.entry.xy[0], "y": self.entry.xy[1], "m": self.entry.m,
            "stratum": None if self.entry.stratum is None else "".join(map(str, self.entry.stratum)),
            "image": FIXED if img is None else {"component": img.component, "s": img.s,
                                                "x": img.xy[0], "y": img.xy[1], "m": img.m},
            "transit_time": self.transit_time, "word": self.word,
            "trajectory": self.trajectory, "step": self.step, "arc": self.arc,
            "f_entry": self.f_entry, "f_image": self.f_image,
        }


@dataclass
class CausalityTable:
    rows: list[Row]
    strata: Strata | None = None
    lengths: tuple[float, ...] = ()
    source: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def fixed_rows(self) -> list[Row]:
        return [r for r in self.rows if r.is_fixed]

    @property
    def moving_rows(self) -> list[Row]:
        return [r for r in self.rows if not r.is_fixed]

    def samples(self, arc: int | None = None) -> list[Row]:
        rows = [r for r in self.rows if r.kind == "sample" and (arc is None or r.arc == arc)]
        return rows

    def arc_delta(self, component: int, s0: float, s1: float) -> float:
        if not self.lengths:
            return s1 - s0
        L = self.lengths[component]
        return (s1 - s0 + L / 2) % L - L / 2

    def to_json(self) -> str:
        payload = {"source": self.source, "rows": [r.as_dict() for r in self.rows]}
        if self.strata is not None:
            payload["strata"] = self.strata.as_dict()
        return json.dumps(payload, indent=1, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["kind", "component", "s", "x", "y", "m", "image_component", "image_s",
                     "image_x", "image_y", "image_m", "transit_time", "word", "trajectory", "step"])
        for r in self.rows:
            e, i = r.entry, r.image
            img = ["FIXED", "", "", "", ""] if i is None else [i.component, _fmt(i.s), _fmt(i.xy[0]),
                                                                _fmt(i.xy[1]), i.m]
            wr.writerow([r.kind, e.component, _fmt(e.s), _fmt(e.xy[0]), _fmt(e.xy[1]), e.m, *img,
                         _fmt(r.transit_time), r.word, r.trajectory, r.step])
        return buf.getvalue()


def _fmt(x: float) -> str:
    return f"{x:.12g}"


# ------------------------------------------------------------- construction

def default_height(d: Domain2D, v: VectorField) -> Expr | None:
    """Height along the mean direction of v on the boundary, if v climbs it."""
    pts = np.vstack([c.samples for c in d.components])
    fx, fy = v(pts[:, 0], pts[:, 1])
    fx = np.broadcast_to(np.asarray(fx, dtype=float), pts[:, 0].shape)
    fy = np.broadcast_to(np.asarray(fy, dtype=float), pts[:, 0].shape)
    mx, my = float(np.mean(fx)), float(np.mean(fy))
    n = np.hypot(mx, my)
    if n == 0:
        return None
    f = as_expr(f"{float(mx / n)!r} * x + {float(my / n)!r} * y")
    # L_v f > 0 on a grid covering the domain
    xmin, xmax, ymin, ymax = d.bbox
    gx, gy = np.meshgrid(np.linspace(xmin, xmax, 48), np.linspace(ymin, ymax, 48))
    inside = np.asarray(d.w(gx, gy)) >= 0
    df = lie_jet_batch(f, v, gx[inside], gy[inside], 1)[1]
    if np.all(df > 0) and np.all(lie_jet_batch(f, v, pts[:, 0], pts[:, 1], 1)[1] > 0):
        return f
    return None


def sample_positions(st: Strata, lengths: Sequence[float], N: int, offset: float = 0.5):
    """Entry samples ``s_start + (k + offset) / N * length`` on every entry arc."""
    out = []
    plus = [a for a in st.arcs if a.sign == "+"]
    for ai, arc in enumerate(plus):
        L = lengths[arc.component]
        span = arc.length(L)
        for k in range(N):
            frac = (k + offset) / N
            if 0 < frac < 1 or arc.closed:
                out.append((ai, arc.component, (arc.s_start + frac * span) % L))
    return out


def compute_table(d: Domain2D, v, N: int = 64, f=None, offset: float = 0.5,
                  st: Strata | None = None, controls=None) -> CausalityTable:
    v = VectorField.of(v)
    st = st or strata(d, v)
    lengths = tuple(c.length for c in d.components)
    if f is None:
        f = default_height(d, v)
    else:
        f = as_expr(f)
    positions = sample_positions(st, lengths, N, offset)
    comps = np.array([c for _, c, _ in positions], dtype=int)
    ss = np.array([s for _, _, s in positions], dtype=float)
    xys = np.zeros((len(positions), 2))
    for k in np.unique(comps):
        xys[comps == k] = d.point(int(k), ss[comps == k])
    entries = [BoundaryPoint(int(c), float(s), (float(x), float(y)), (1, "+"), 1)
               for c, s, (x, y) in zip(comps, ss, xys)]
    trajectories = trace_many(d, v, entries, controls, strict=True)
    arcs_of = [ai for ai, _, _ in positions]
    rows: list[Row] = []
    for tid, (tr, ai) in enumerate(zip(trajectories, arcs_of)):
        rows.extend(_rows_of(tr, tid, "sample", ai))
    tid = len(trajectories)
    for p in st.points:
        if p.stratum == (2, "-"):
            rows.append(Row(p, None, "fixed", "2", tid, 0))
        else:
            tr = trace_trajectory(d, v, p, controls)
            rows.extend(_rows_of(tr, tid, "preimage", None))
        tid += 1
    if f is not None:
        for r in rows:
            r.f_entry = float(f(*r.entry.xy))
            r.f_image = r.f_entry if r.image is None else float(f(*r.image.xy))
    rows.sort(key=lambda r: (r.entry.component, r.entry.s, KIND_ORDER[r.kind]))
    src = {"domain": d.name, "w": d.w.source(), "v": str(v), "N": N, "offset": offset,
           "f": None if f is None else f.source()}
    return CausalityTable(rows, st, lengths, src)


def _rows_of(tr: Trajectory, tid: int, first_kind: str, arc: int | None) -> list[Row]:
    word = str(tr.omega)
    pts = tr.divisor
    times = _arrival_times(tr)
    out = []
    for k in range(len(pts) - 1):
        kind = first_kind if k == 0 else "continuation"
        out.append(Row(pts[k], pts[k + 1], kind, word, tid, k, times[k + 1] - times[k],
                       arc if k == 0 else None))
    return out


def _arrival_times(tr: Trajectory) -> list[float]:
    # divisor points are reached in order; times come from the path when present
    if not tr.path:
        t = [0.0] * len(tr.divisor)
        t[-1] = tr.transit_time
        return t
    path = np.asarray(tr.path)
    out = []
    for p in tr.divisor:
        k = int(np.argmin(np.hypot(path[:, 1] - p.xy[0], path[:, 2] - p.xy[1])))
        out.append(float(path[k, 0]))
    out[0], out[-1] = 0.0, tr.transit_time
    return out


def mirror_table(d: Domain2D, v, N: int = 64, **kw) -> CausalityTable:
    """Causality table of the reversed field ``-v``."""
    return compute_table(d, -VectorField.of(v), N, **kw)


def table_from_local_model(model: LocalModel, x=None) -> CausalityTable:
    """Table of one fiber of a local model; boundary points are the divisor roots."""
    d = model.fiber_divisor(x)
    comps = model.components(x)
    rows = []
    for tid, comp in enumerate(comps):
        pts = [d[k] for k in comp.points]
        word = str(OmegaWord(tuple(p.m for p in pts)))
        bps = [BoundaryPoint(0, p.u, (p.u, 0.0), (min(p.m, 2) if p.m > 1 else 1, p.polarity), p.m)
               for p in pts]
        if comp.is_singleton:
            rows.append(Row(bps[0], None, "fixed", word, tid, 0))
            continue
        for k in range(len(bps) - 1):
            rows.append(Row(bps[k], bps[k + 1], "sample" if k == 0 else "continuation", word,
                            tid, k, bps[k + 1].s - bps[k].s))
    rows.sort(key=lambda r: (r.entry.s, KIND_ORDER[r.kind]))
    return CausalityTable(rows, None, (), {"local_model": str(model.omega),
                                           "x": [float(t) for t in np.atleast_1d(x if x is not None else [])]})


# ------------------------------------------------------------------- chains

@dataclass
class Chain:
    rows: list[Row]
    points: list[BoundaryPoint]

    @property
    def arrows(self) -> int:
        return sum(1 for r in self.rows if not r.is_fixed)

    @property
    def word(self) -> OmegaWord:
        return OmegaWord(tuple(p.m for p in self.points))


def _same(a: BoundaryPoint, b: BoundaryPoint, tol: float = MATCH_TOL) -> bool:
    return a.component == b.component and abs(a.xy[0] - b.xy[0]) <= tol and abs(a.xy[1] - b.xy[1]) <= tol


class PointIndex:
    """Identify boundary points that agree within a tolerance (grid hashed)."""

    def __init__(self, tol: float = MATCH_TOL):
        self.tol = tol
        self.points: list[BoundaryPoint] = []
        self._grid: dict[tuple, list[int]] = {}

    def _cell(self, p: BoundaryPoint, dx: int = 0, dy: int = 0):
        return (p.component, int(np.floor(p.xy[0] / self.tol)) + dx,
                int(np.floor(p.xy[1] / self.tol)) + dy)

    def key(self, p: BoundaryPoint) -> int:
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for i in self._grid.get(self._cell(p, dx, dy), ()):
                    if _same(p, self.points[i], self.tol):
                        return i
        self.points.append(p)
        self._grid.setdefault(self._cell(p), []).append(len(self.points) - 1)
        return len(self.points) - 1


def chains(table: CausalityTable) -> list[Chain]:
    """Maximal chains under composition of rows."""
    by_entry: dict[int, list[Row]] = {}
    key = PointIndex().key
    images = set()
    for r in table.rows:
        by_entry.setdefault(key(r.entry), []).append(r)
        if r.image is not None:
            images.add(key(r.image))
    out = []
    for r in table.rows:
        k = key(r.entry)
        if k in images:
            continue
        if r.is_fixed:
            out.append(Chain([r], [r.entry]))
            continue
        seq, points = [r], [r.entry, r.image]
        seen = {k}
        cur = r
        while cur.image is not None:
            nk = key(cur.image)
            nxt = [q for q in by_entry.get(nk, []) if not q.is_fixed]
            if not nxt or nk in seen:
                break
            seen.add(nk)
            cur = nxt[0]
            seq.append(cur)
            points.append(cur.image)
        out.append(Chain(seq, points))
    return out


def is_strict_partial_order(table: CausalityTable) -> bool:
    key = PointIndex().key
    ts = graphlib.TopologicalSorter()
    for r in table.rows:
        if r.image is not None:
            ts.add(key(r.image), key(r.entry))
    try:
        tuple(ts.static_order())
    except graphlib.CycleError:
        return False
    return True


def reachability_dot(table: CausalityTable) -> str:
    """Reachability among tangency points and the chains through them."""
    lines = ["digraph reachability {", "  rankdir=LR;"]
    chs = [c for c in chains(table) if any(p.m == 2 for p in c.points)]
    names = {}

    def name(p: BoundaryPoint) -> str:
        k = (p.component, round(p.xy[0], 6), round(p.xy[1], 6))
        if k not in names:
            names[k] = f"p{len(names)}"
            label = f"({p.xy[0]:.4f}, {p.xy[1]:.4f}) m={p.m}"
            lines.append(f'  {names[k]} [label="{label}"];')
        return names[k]

    for c in chs:
        ids = [name(p) for p in c.points]
        for a, b in zip(ids, ids[1:]):
            lines.append(f"  {a} -> {b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -------------------------------------------------------------------- G_v

def export_gv(table: CausalityTable, d: Domain2D | None = None, v=None) -> dict:
    """Block structure of the graph of s -> C(s) and its discontinuities."""
    st = table.strata
    plus = [a for a in st.arcs if a.sign == "+"]
    minus = [a for a in st.arcs if a.sign == "-"]
    board = _checkerboard_indices(st)
    blocks = set()
    curves = []
    discontinuities = []
    for ai, arc in enumerate(plus):
        rows = sorted(table.samples(ai), key=lambda r: (r.entry.s - arc.s_start) % table.lengths[arc.component])
        pts = []
        for r in rows:
            bj = _arc_index(minus, r.image, table.lengths)
            blocks.add((ai, bj))
            pts.append({"s": r.entry.s, "image_component": r.image.component, "image_s": r.image.s,
                        "block": [ai, bj]})
        curves.append(pts)
        gaps = []
        for r0, r1 in zip(rows, rows[1:]):
            if r0.image.component == r1.image.component:
                gaps.append(abs(table.arc_delta(r0.image.component, r0.image.s, r1.image.s)))
        med = float(np.median(gaps)) if gaps else 0.0
        for r0, r1 in zip(rows, rows[1:]):
            jump = (r0.image.component != r1.image.component or
                    abs(table.arc_delta(r0.image.component, r0.image.s, r1.image.s)) > 10 * med)
            if jump:
                rec = {"arc": ai, "arc_component": arc.component, "between": [r0.entry.s, r1.entry.s],
                       "left_limit": {"component": r0.image.component, "s": r0.image.s},
                       "right_limit": {"component": r1.image.component, "s": r1.image.s}}
                if d is not None and v is not None:
                    rec.update(refine_discontinuity(d, v, r0, r1, table))
                discontinuities.append(rec)
    occupied = sorted(blocks)
    parity_ok = all((board[("+", i)] + board[("-", j)]) % 2 == 1 for i, j in occupied)
    variation = 0.0
    for pts in curves:
        for a, b in zip(pts, pts[1:]):
            if a["image_component"] == b["image_component"]:
                variation += abs(table.arc_delta(a["image_component"], a["image_s"], b["image_s"]))
    return {
        "plus_arcs": [a.as_dict() for a in plus],
        "minus_arcs": [a.as_dict() for a in minus],
        "blocks": [list(b) for b in occupied],
        "checkerboard": {f"{k[0]}{k[1]}": i for k, i in sorted(board.items())},
        "parity_ok": parity_ok,
        "curves": curves,
        "discontinuities": discontinuities,
        "total_variation": variation,
    }


def _checkerboard_indices(st: Strata) -> dict:
    """Global alternating enumeration of arcs, each component starting with a + arc."""
    out = {}
    pos = 0
    comps = sorted({a.component for a in st.arcs})
    for c in comps:
        arcs = [a for a in st.arcs if a.component == c]
        k0 = next((i for i, a in enumerate(arcs) if a.sign == "+"), 0)
        for a in arcs[k0:] + arcs[:k0]:
            if a.sign == "+":
                out[("+", st.arcs_with_sign("+").index(a))] = pos
            else:
                out[("-", st.arcs_with_sign("-").index(a))] = pos
            pos += 1
    return out


def _arc_index(arcs, p: BoundaryPoint, lengths) -> int:
    best, best_d = -1, np.inf
    for i, a in enumerate(arcs):
        if a.component != p.component:
            continue
        L = lengths[a.component]
        if a.contains(p.s, L):
            return i
        dist = min(abs((p.s - a.s_start + L / 2) % L - L / 2), abs((p.s - a.s_end + L / 2) % L - L / 2))
        if dist < best_d:
            best, best_d = i, dist
    return best


def refine_discontinuity(d: Domain2D, v, r0: Row, r1: Row, table: CausalityTable,
                         iters: int = 80) -> dict:
    """Bisect between two samples whose images jump; one-sided limits at the jump.

    Limits are read off one trace just outside the final bracket.  Near a fold
    the increment converges like the square root of the offset, and the graze
    tolerance flattens the last stretch, so agreement is at the 1e-7 level.
    """
    v = VectorField.of(v)
    comp = r0.entry.component
    L = table.lengths[comp]
    lo = r0.entry.s
    hi = lo + (r1.entry.s - lo) % L

    def trace_at(ss: list[float]) -> list[tuple[BoundaryPoint, BoundaryPoint]]:
        es = []
        for s in ss:
            xy = d.point(comp, s % L)
            es.append(BoundaryPoint(comp, s % L, (float(xy[0]), float(xy[1])), (1, "+"), 1))
        return [(e, tr.divisor[1]) for e, tr in zip(es, trace_many(d, v, es, strict=True))]

    def left_side(img: BoundaryPoint) -> bool:
        if img.component != r1.image.component:
            return True
        if img.component != r0.image.component:
            return False
        return abs(table.arc_delta(img.component, img.s, r0.image.s)) < abs(
            table.arc_delta(img.component, img.s, r1.image.s))

    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        (_, img), = trace_at([mid])
        if left_side(img):
            lo = mid
        else:
            hi = mid
    out = {"location": 0.5 * (lo + hi) % L, "bracket": [lo % L, hi % L]}
    f_src = table.source.get("f")
    if f_src is not None:
        f = as_expr(f_src)
        off = 1e-9 * L
        for side, s_side in (("left", lo - off), ("right", hi + off)):
            (e, img), = trace_at([s_side])
            out[f"delta_{side}_limit"] = float(f(*img.xy) - f(*e.xy))
            out[f"{side}_image"] = {"component": img.component, "s": img.s}
    return out


# ----------------------------------------------------------- semicontinuity

def semicontinuity(table: CausalityTable, gv: dict | None = None) -> dict:
    """Slack of ``f(C(y)) - f(y) >= 0`` per row and of lower semicontinuity of
    that increment at each refined discontinuity."""
    rows = [r for r in table.rows if r.f_entry is not None]
    slacks = [r.f_image - r.f_entry for r in rows]
    out = {"rows": len(rows), "min_slack": min(slacks) if slacks else None, "jumps": []}
    if gv is None:
        return out
    for disc in gv["discontinuities"]:
        if "delta_left_limit" not in disc:
            continue
        at = _preimage_row_at(table, disc["location"], disc["arc_component"])
        left, right = disc["delta_left_limit"], disc["delta_right_limit"]
        delta_at = (at.f_image - at.f_entry) if at is not None else min(left, right)
        out["jumps"].append({"location": disc["location"], "delta_left": left, "delta_right": right,
                             "delta_at": delta_at, "matched_row": at is not None,
                             "slack": min(left, right) - delta_at})
    out["min_jump_slack"] = min((j["slack"] for j in out["jumps"]), default=None)
    return out


def _preimage_row_at(table: CausalityTable, s: float, component: int, tol: float = 1e-6) -> Row | None:
    for r in table.rows:
        if r.kind == "preimage" and r.entry.component == component and \
                abs(table.arc_delta(component, r.entry.s, s)) <= tol:
            return r
    return None


def reversal_residuals(d: Domain2D, v, table: CausalityTable) -> list[float]:
    """Distance between p and ``C_{-v}(C_v(p))`` over the moving rows."""
    v = VectorField.of(v)
    rows = table.moving_rows
    back: dict[int, BoundaryPoint] = {}
    simple = [i for i, r in enumerate(rows) if r.image.m == 1]
    starts = [BoundaryPoint(rows[i].image.component, rows[i].image.s, rows[i].image.xy, (1, "+"), 1)
              for i in simple]
    for i, tr in zip(simple, trace_many(d, -v, starts, strict=True)):
        back[i] = tr.divisor[1]
    for i, r in enumerate(rows):
        if i in back:
            continue
        q = r.image
        tr = trace_trajectory(d, -v, BoundaryPoint(q.component, q.s, q.xy))
        idx = min(range(len(tr.divisor)),
                  key=lambda k: np.hypot(tr.divisor[k].xy[0] - q.xy[0], tr.divisor[k].xy[1] - q.xy[1]))
        back[i] = tr.divisor[idx + 1]
    return [float(np.hypot(back[i].xy[0] - r.entry.xy[0], back[i].xy[1] - r.entry.xy[1]))
            for i, r in enumerate(rows)]


# -------------------------------------------------------------- fixed points

def fixed_point_report(table: CausalityTable, d: Domain2D | None = None, v=None,
                       tol: float = 1e-6) -> dict:
    """Check that ``C(x) = x`` exactly on the detected singleton tangencies.

    Every ∂2^- point of the strata must carry a FIXED row (and retrace as a
    singleton when the domain is given); every other row must move its entry
    by more than ``tol`` in arc length.
    """
    expected = table.strata.points_with_sign("-") if table.strata is not None else []
    fixed = table.fixed_rows
    unmatched = []
    for p in expected:
        hit = [r for r in fixed if r.entry.component == p.component and
               abs(table.arc_delta(p.component, r.entry.s, p.s)) <= tol]
        if not hit:
            unmatched.append(p.as_dict())
    stray = [r.entry.as_dict() for r in fixed
             if not any(r.entry.component == p.component and
                        abs(table.arc_delta(p.component, r.entry.s, p.s)) <= tol for p in expected)]
    retraced = []
    if d is not None and v is not None:
        for p in expected:
            tr = trace_trajectory(d, v, p)
            retraced.append(tr.is_singleton)
    moves = []
    for r in table.moving_rows:
        if r.image.component != r.entry.component:
            continue
        moves.append(abs(table.arc_delta(r.entry.component, r.entry.s, r.image.s)))
    min_move = min(moves, default=float("inf"))
    return {"expected": len(expected), "fixed_rows": len(fixed), "unmatched": unmatched,
            "stray": stray, "retraced_singletons": retraced, "min_displacement": min_move,
            "passed": not unmatched and not stray and all(retraced) and min_move > tol}
