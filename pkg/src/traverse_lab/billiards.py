"""Flat billiards: straight chords between boundary states.

A table is a convex outer curve with optional obstacles inside it.  States
live on the boundary of the region between them; normals always point out
of that region, so an obstacle's normal points into the obstacle.  Chords
that touch an obstacle tangentially pass straight through it and record a
multiplicity-2 point in their divisor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import ellipeinc

from .errors import NoExit, NoTangent
from .field_expr import Expr, Neg, as_expr, gradient
from .flow_sim import BoundaryCurve, trace_boundary
from .omega import OmegaWord

TAU_GRAZE = 1e-7  # relative to table diameter


# ------------------------------------------------------------------- curves

class Curve:
    """Closed curve ``{F = 0}`` with ``F < 0`` inside."""

    def F(self, x, y):
        raise NotImplementedError

    def grad(self, x, y):
        raise NotImplementedError

    def point(self, s):
        raise NotImplementedError

    def locate(self, p) -> float:
        raise NotImplementedError

    @property
    def length(self) -> float:
        raise NotImplementedError

    def outward_normal(self, x, y):
        gx, gy = self.grad(x, y)
        n = np.hypot(gx, gy)
        return gx / n, gy / n

    def line_values(self, P, D, t):
        """``F`` along rays ``P + t D``; P, D are (n, 2), t is (n, k)."""
        x = P[:, :1] + t * D[:, :1]
        y = P[:, 1:] + t * D[:, 1:]
        return np.broadcast_to(np.asarray(self.F(x, y), dtype=float), x.shape)

    def quadratic(self, P, D):
        """Coefficients (a, b, c) of F(P + tD) when F is quadratic, else None."""
        return None

    def samples(self, n: int = 256) -> np.ndarray:
        s = np.linspace(0, self.length, n, endpoint=False)
        return np.array([self.point(si) for si in s])

    def diameter(self) -> float:
        pts = self.samples(128)
        return float(np.max(np.linalg.norm(pts[:, None] - pts[None], axis=-1)))


@dataclass(frozen=True)
class Circle(Curve):
    cx: float
    cy: float
    r: float

    def F(self, x, y):
        return ((x - self.cx) ** 2 + (y - self.cy) ** 2 - self.r ** 2) / (2 * self.r)

    def grad(self, x, y):
        return (x - self.cx) / self.r, (y - self.cy) / self.r

    @property
    def length(self) -> float:
        return 2 * math.pi * self.r

    def point(self, s):
        a = np.asarray(s) / self.r
        return np.stack([self.cx + self.r * np.cos(a), self.cy + self.r * np.sin(a)], axis=-1)

    def locate(self, p) -> float:
        return (math.atan2(p[1] - self.cy, p[0] - self.cx) % (2 * math.pi)) * self.r

    def quadratic(self, P, D):
        q = P - np.array([self.cx, self.cy])
        k = 1 / (2 * self.r)
        return (k * np.sum(D * D, axis=1), k * 2 * np.sum(q * D, axis=1),
                k * (np.sum(q * q, axis=1) - self.r ** 2))

    def conic(self) -> np.ndarray:
        return Ellipse(self.cx, self.cy, self.r, self.r).conic()


@dataclass(frozen=True)
class Ellipse(Curve):
    """Axis-aligned ellipse; arc length from the incomplete elliptic integral."""

    cx: float
    cy: float
    a: float
    b: float

    def F(self, x, y):
        u, v = (x - self.cx) / self.a, (y - self.cy) / self.b
        return (u * u + v * v - 1) * (0.5 * min(self.a, self.b))

    def grad(self, x, y):
        k = min(self.a, self.b)
        return k * (x - self.cx) / self.a ** 2, k * (y - self.cy) / self.b ** 2

    def _arc(self, phi):
        # arc length from phi = 0, with x = a cos(phi), y = b sin(phi)
        a, b = self.a, self.b
        if a >= b:
            m = 1 - (b / a) ** 2
            return a * (ellipeinc(np.pi / 2, m) - ellipeinc(np.pi / 2 - phi, m))
        m = 1 - (a / b) ** 2
        return b * ellipeinc(phi, m)

    @property
    def length(self) -> float:
        return float(self._arc(2 * np.pi))

    def angle_at(self, s):
        s = np.asarray(s, dtype=float) % self.length
        phi = 2 * np.pi * s / self.length
        for _ in range(30):
            speed = np.hypot(self.a * np.sin(phi), self.b * np.cos(phi))
            phi = phi - (self._arc(phi) - s) / speed
        return phi

    def point(self, s):
        phi = self.angle_at(s)
        return np.stack([self.cx + self.a * np.cos(phi), self.cy + self.b * np.sin(phi)], axis=-1)

    def locate(self, p) -> float:
        phi = math.atan2((p[1] - self.cy) / self.b, (p[0] - self.cx) / self.a) % (2 * math.pi)
        return float(self._arc(phi))

    def quadratic(self, P, D):
        sc = np.array([1 / self.a, 1 / self.b])
        q = (P - np.array([self.cx, self.cy])) * sc
        d = D * sc
        k = 0.5 * min(self.a, self.b)
        return (k * np.sum(d * d, axis=1), k * 2 * np.sum(q * d, axis=1), k * (np.sum(q * q, axis=1) - 1))

    def conic(self) -> np.ndarray:
        """Symmetric 3x3 matrix A with ``[x y 1] A [x y 1]^T = 0``."""
        A = np.diag([1 / self.a ** 2, 1 / self.b ** 2, -1.0])
        T = np.array([[1, 0, -self.cx], [0, 1, -self.cy], [0, 0, 1.0]])
        return T.T @ A @ T


class ImplicitCurve(Curve):
    """Closed component of ``{expr = 0}`` with ``expr < 0`` inside."""

    def __init__(self, expr, bbox: Sequence[float], resolution: int = 2048):
        self.expr: Expr = as_expr(expr)
        self.bbox = tuple(bbox)
        # the boundary tracer expects the region as {w >= 0}
        self._w = Neg(self.expr)
        curves = trace_boundary(self._w, self.bbox, resolution)
        if len(curves) != 1:
            raise ValueError(f"expected one closed curve, found {len(curves)}")
        self.curve: BoundaryCurve = curves[0]
        # the tracer orients with {w >= 0} on the left, i.e. counterclockwise here
        self._scale = float(np.median(np.hypot(*gradient(self.expr, self.curve.samples[:, 0],
                                                          self.curve.samples[:, 1]))))

    def __repr__(self):
        return f"ImplicitCurve({self.expr.source()!r})"

    def F(self, x, y):
        return np.asarray(self.expr(x, y), dtype=float) / self._scale

    def grad(self, x, y):
        gx, gy = gradient(self.expr, np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return gx / self._scale, gy / self._scale

    @property
    def length(self) -> float:
        return self.curve.length

    def point(self, s):
        return self.curve.point(s)

    def locate(self, p) -> float:
        return float(self.curve.locate(p)[0])


# ------------------------------------------------------------------- states

@dataclass(frozen=True)
class UnitState:
    """Boundary point with a unit direction; ``n`` is the outward normal of the table."""

    curve: int
    xy: tuple[float, float]
    u: tuple[float, float]
    n: tuple[float, float]

    @property
    def normal_component(self) -> float:
        return self.u[0] * self.n[0] + self.u[1] * self.n[1]

    @property
    def tangential_component(self) -> float:
        """Component along the inward normal turned a quarter counterclockwise."""
        return self.u[0] * self.n[1] - self.u[1] * self.n[0]

    def classify(self, tol: float = 1e-12) -> str:
        c = self.normal_component
        if c < -tol:
            return "inward"
        if c > tol:
            return "outward"
        return "tangent"


def tau(state: UnitState) -> UnitState:
    """Reflect the normal component; tangent states are fixed."""
    c = state.normal_component
    u = (state.u[0] - 2 * c * state.n[0], state.u[1] - 2 * c * state.n[1])
    return UnitState(state.curve, state.xy, u, state.n)


# -------------------------------------------------------------------- table

@dataclass
class ChordDivisor:
    points: list[tuple[float, float]]
    multiplicities: list[int]
    curves: list[int]

    @property
    def omega(self) -> OmegaWord:
        return OmegaWord(tuple(self.multiplicities))

    @property
    def m(self) -> int:
        return sum(self.multiplicities)

    @property
    def m_reduced(self) -> int:
        return sum(k - 1 for k in self.multiplicities)


@dataclass
class BilliardTable:
    outer: Curve
    obstacles: list[Curve] = field(default_factory=list)
    name: str = "table"

    def __post_init__(self):
        self.diam = self.outer.diameter()
        self.tau_graze = TAU_GRAZE * self.diam
        for k, ob in enumerate(self.obstacles):
            pts = ob.samples(128)
            if np.any(np.asarray(self.outer.F(pts[:, 0], pts[:, 1])) >= 0):
                raise ValueError(f"obstacle {k} is not strictly inside the outer curve")
            for j, other in enumerate(self.obstacles):
                if j != k and np.any(np.asarray(other.F(pts[:, 0], pts[:, 1])) <= 0):
                    raise ValueError(f"obstacles {k} and {j} intersect")

    @property
    def curves(self) -> list[Curve]:
        return [self.outer, *self.obstacles]

    def normal(self, curve: int, xy) -> tuple[float, float]:
        nx, ny = self.curves[curve].outward_normal(np.asarray(xy[0]), np.asarray(xy[1]))
        sign = 1.0 if curve == 0 else -1.0
        return float(sign * nx), float(sign * ny)

    def state(self, curve: int, s: float, angle: float) -> UnitState:
        """State at arc length s whose direction makes ``angle`` with the inward normal.

        Positive angles turn counterclockwise from the inward normal.
        """
        xy = tuple(float(c) for c in self.curves[curve].point(s))
        n = self.normal(curve, xy)
        c, sn = math.cos(angle), math.sin(angle)
        u = (-n[0] * c + n[1] * sn, -n[1] * c - n[0] * sn)
        return UnitState(curve, xy, u, n)

    def state_from(self, curve: int, xy, u) -> UnitState:
        u = np.asarray(u, dtype=float)
        u = u / np.linalg.norm(u)
        return UnitState(curve, (float(xy[0]), float(xy[1])), (float(u[0]), float(u[1])),
                         self.normal(curve, xy))

    # -- ray casting ----------------------------------------------------------
    def cast(self, P: np.ndarray, D: np.ndarray, start_curve: np.ndarray | None = None):
        """First exit and the grazes before it, for many rays at once.

        Returns ``(t_exit, exit_curve, grazes)`` where grazes is a list per ray
        of ``(t, curve)`` pairs.
        """
        P = np.atleast_2d(np.asarray(P, dtype=float))
        D = np.atleast_2d(np.asarray(D, dtype=float))
        n = len(P)
        eps = 1e-9 * self.diam
        t_exit = np.full(n, np.inf)
        curve_exit = np.full(n, -1)
        graze_t: list[np.ndarray] = []
        graze_c: list[np.ndarray] = []
        for k, c in enumerate(self.curves):
            inside_is_table = k == 0
            tx, tg, dist = self._ray_curve(c, P, D, inside_is_table, eps)
            better = tx < t_exit
            t_exit = np.where(better, tx, t_exit)
            curve_exit = np.where(better, k, curve_exit)
            if not inside_is_table:
                graze = np.abs(dist) <= self.tau_graze
                graze_t.append(np.where(graze, tg, np.inf))
                graze_c.append(np.full(n, k))
        grazes = [[] for _ in range(n)]
        for tg, ck in zip(graze_t, graze_c):
            for i in np.flatnonzero(np.isfinite(tg) & (tg < t_exit)):
                grazes[i].append((float(tg[i]), int(ck[i])))
        for g in grazes:
            g.sort()
        return t_exit, curve_exit, grazes

    def _ray_curve(self, c: Curve, P, D, inside_is_table: bool, eps: float):
        """(first transversal leaving time, tangency time, tangency distance) per ray."""
        n = len(P)
        quad = c.quadratic(P, D)
        if quad is not None:
            a, b, cc = quad
            disc = b * b - 4 * a * cc
            sq = np.sqrt(np.maximum(disc, 0))
            t1 = (-b - sq) / (2 * a)
            t2 = (-b + sq) / (2 * a)
            tmin = -b / (2 * a)
            fmin = cc - b * b / (4 * a)
            # distance of the closest approach, first order in F / |grad F|
            px = P[:, 0] + tmin * D[:, 0]
            py = P[:, 1] + tmin * D[:, 1]
            gx, gy = c.grad(px, py)
            dist = fmin / np.maximum(np.hypot(gx, gy), 1e-300)
            if inside_is_table:
                tx = np.where(t2 > eps, t2, np.inf)
                return tx, np.full(n, np.inf), np.full(n, np.inf)
            hit = (dist < -self.tau_graze) & (t1 > eps)
            tx = np.where(hit, t1, np.inf)
            tg = np.where(tmin > eps, tmin, np.inf)
            return tx, tg, np.where(tmin > eps, dist, np.inf)
        return self._ray_curve_sampled(c, P, D, inside_is_table, eps)

    def _ray_curve_sampled(self, c: Curve, P, D, inside_is_table: bool, eps: float, k: int = 256):
        n = len(P)
        T = 1.5 * self.diam
        t = np.linspace(eps, T, k)[None, :].repeat(n, axis=0)
        f = c.line_values(P, D, t)
        if inside_is_table:
            crossing = (f[:, :-1] < 0) & (f[:, 1:] >= 0)
        else:
            crossing = (f[:, :-1] > 0) & (f[:, 1:] <= 0)
        has = crossing.any(axis=1)
        j = np.argmax(crossing, axis=1)
        lo = t[np.arange(n), j]
        hi = t[np.arange(n), np.minimum(j + 1, k - 1)]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            fm = c.line_values(P, D, mid[:, None])[:, 0]
            left = (fm < 0) if inside_is_table else (fm > 0)
            lo = np.where(left, mid, lo)
            hi = np.where(left, hi, mid)
        tx = np.where(has, 0.5 * (lo + hi), np.inf)
        if inside_is_table:
            return tx, np.full(n, np.inf), np.full(n, np.inf)
        # closest approach: interior minima of F among positive samples
        mins = (f[:, 1:-1] < f[:, :-2]) & (f[:, 1:-1] <= f[:, 2:]) & (f[:, 1:-1] > 0)
        tg = np.full(n, np.inf)
        dist = np.full(n, np.inf)
        rows, cols = np.nonzero(mins)
        if rows.size:
            a = t[rows, cols]
            b = t[rows, cols + 2]
            gr = (math.sqrt(5) - 1) / 2
            Pr, Dr = P[rows], D[rows]
            for _ in range(80):
                x1 = b - gr * (b - a)
                x2 = a + gr * (b - a)
                f1 = c.line_values(Pr, Dr, x1[:, None])[:, 0]
                f2 = c.line_values(Pr, Dr, x2[:, None])[:, 0]
                shrink = f1 < f2
                b = np.where(shrink, x2, b)
                a = np.where(shrink, a, x1)
            tm = 0.5 * (a + b)
            fm = c.line_values(Pr, Dr, tm[:, None])[:, 0]
            gx, gy = c.grad(Pr[:, 0] + tm * Dr[:, 0], Pr[:, 1] + tm * Dr[:, 1])
            dm = fm / np.maximum(np.hypot(gx, gy), 1e-300)
            order = np.argsort(tm)
            for r, tt, dd in zip(rows[order], tm[order], dm[order]):
                if not np.isfinite(tg[r]):
                    tg[r], dist[r] = tt, dd
        return tx, tg, dist


def scatter(table: BilliardTable, state: UnitState):
    """Fly from an inward state to the next transversal hit; returns (outward state, divisor)."""
    if state.classify(1e-12) != "inward":
        raise ValueError("scatter needs an inward state")
    P = np.array([state.xy])
    D = np.array([state.u])
    t_exit, curve_exit, grazes = table.cast(P, D)
    t = float(t_exit[0])
    if not np.isfinite(t):
        raise NoExit(f"no exit from {state.xy} along {state.u}")
    k = int(curve_exit[0])
    xy = (state.xy[0] + t * state.u[0], state.xy[1] + t * state.u[1])
    out = UnitState(k, xy, state.u, table.normal(k, xy))
    pts = [state.xy]
    mult = [1]
    curves = [state.curve]
    for tg, cg in grazes[0]:
        pts.append((state.xy[0] + tg * state.u[0], state.xy[1] + tg * state.u[1]))
        mult.append(2)
        curves.append(cg)
    pts.append(xy)
    mult.append(1)
    curves.append(k)
    return out, ChordDivisor(pts, mult, curves)


def billiard_map(table: BilliardTable, state: UnitState) -> UnitState:
    out, _ = scatter(table, state)
    return tau(out)


def orbit(table: BilliardTable, state: UnitState, steps: int) -> list[UnitState]:
    out = [state]
    for _ in range(steps):
        state = billiard_map(table, state)
        out.append(state)
    return out


def incidence_angle(state: UnitState) -> float:
    """Signed angle from the inward normal to the direction, same sense as ``state``."""
    return math.atan2(state.tangential_component, -state.normal_component)


# ----------------------------------------------------------------- Poncelet

def _homog(p) -> np.ndarray:
    return np.array([p[0], p[1], 1.0])


def tangent_directions(A2: np.ndarray, p) -> list[np.ndarray]:
    """Unit directions of the two tangent lines from p to the conic A2 (dual conic)."""
    P = _homog(p)
    Astar = np.linalg.inv(A2)
    # the line through p with direction d is l = P x (d, 0)
    def line(d):
        return np.cross(P, np.array([d[0], d[1], 0.0]))

    e1 = line((1.0, 0.0))
    e2 = line((0.0, 1.0))
    a = e1 @ Astar @ e1
    b = 2 * (e1 @ Astar @ e2)
    c = e2 @ Astar @ e2
    # solve a X^2 + b X Y + c Y^2 = 0 for d = (X, Y)
    disc = b * b - 4 * a * c
    if disc < 0:
        raise NoTangent(f"no real tangent from {tuple(p)}")
    out = []
    sq = math.sqrt(disc)
    if abs(a) >= abs(c):
        for r in ((-b + sq) / (2 * a), (-b - sq) / (2 * a)):
            # X / Y = r
            d = np.array([r, 1.0])
            out.append(d / np.linalg.norm(d))
    else:
        for r in ((-b + sq) / (2 * c), (-b - sq) / (2 * c)):
            d = np.array([1.0, r])
            out.append(d / np.linalg.norm(d))
    return out


def _conic_center(A: np.ndarray) -> np.ndarray:
    return np.linalg.solve(A[:2, :2], -A[:2, 2])


def poncelet_step(A1: np.ndarray, A2: np.ndarray, p) -> np.ndarray:
    """Next vertex on A1 along the tangent to A2 that keeps A2 on the left."""
    c2 = _conic_center(A2)
    p = np.asarray(p, dtype=float)
    P = _homog(p)
    for d in tangent_directions(A2, p):
        Dh = np.array([d[0], d[1], 0.0])
        # P on A1: (P + tD)^T A1 (P + tD) = 2t P^T A1 D + t^2 D^T A1 D = 0
        t = -2 * (P @ A1 @ Dh) / (Dh @ A1 @ Dh)
        if t < 0:
            d, t = -d, -t
        if d[0] * (c2[1] - p[1]) - d[1] * (c2[0] - p[0]) > 0:
            return p + t * d
    raise NoTangent("tangent chord with the inner conic on the left not found")


def poncelet_check(Q1, Q2, k: int, starts: Sequence) -> list[float]:
    """Distance between each start and its k-th Poncelet vertex."""
    A1 = Q1.conic() if hasattr(Q1, "conic") else np.asarray(Q1)
    A2 = Q2.conic() if hasattr(Q2, "conic") else np.asarray(Q2)
    out = []
    for p in starts:
        p0 = np.asarray(p, dtype=float)
        q = p0
        for _ in range(k):
            q = poncelet_step(A1, A2, q)
        out.append(float(np.linalg.norm(q - p0)))
    return out


def _swept_angle(Q1: Ellipse, A2: np.ndarray, phi0: float, k: int) -> float:
    A1 = Q1.conic()
    p = np.array([Q1.cx + Q1.a * math.cos(phi0), Q1.cy + Q1.b * math.sin(phi0)])
    total = 0.0
    prev = phi0
    for _ in range(k):
        p = poncelet_step(A1, A2, p)
        phi = math.atan2((p[1] - Q1.cy) / Q1.b, (p[0] - Q1.cx) / Q1.a)
        total += (phi - prev) % (2 * math.pi)
        prev = phi
    return total


def confocal_inner(Q1: Ellipse, lam: float) -> Ellipse:
    return Ellipse(Q1.cx, Q1.cy, math.sqrt(Q1.a ** 2 - lam), math.sqrt(Q1.b ** 2 - lam))


def find_confocal_closure(Q1: Ellipse, k: int = 3, phi0: float = 0.3, iters: int = 200) -> Ellipse:
    """Confocal caustic whose Poncelet polygons close after k steps (one turn)."""
    lo, hi = 1e-9, min(Q1.a, Q1.b) ** 2 * (1 - 1e-9)

    def residual(lam):
        return _swept_angle(Q1, confocal_inner(Q1, lam).conic(), phi0, k) - 2 * math.pi

    rlo, rhi = residual(lo), residual(hi)
    if rlo * rhi > 0:
        raise NoTangent("no confocal caustic with the requested closure")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        rm = residual(mid)
        if (rm < 0) == (rlo < 0):
            lo, rlo = mid, rm
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    return confocal_inner(Q1, 0.5 * (lo + hi))


# ----------------------------------------------------------- tangency census

def _random_chords(table: BilliardTable, L: int, rng: np.random.Generator):
    outer = table.outer
    s = rng.uniform(0, outer.length, L)
    P = np.asarray(outer.point(s), dtype=float).reshape(L, 2)
    nx, ny = outer.outward_normal(P[:, 0], P[:, 1])
    # direction angle relative to the inward normal, cosine-weighted lines
    psi = np.arcsin(rng.uniform(-1, 1, L))
    c, sn = np.cos(psi), np.sin(psi)
    D = np.column_stack([-nx * c + ny * sn, -ny * c - nx * sn])
    return P, D


def tangent_chords(table: BilliardTable, per_obstacle: int = 16, seed: int = 0):
    """Chords tangent to each obstacle at random points, started from the outer curve."""
    rng = np.random.default_rng(seed)
    Ps, Ds = [], []
    for ob in table.obstacles:
        for s in rng.uniform(0, ob.length, per_obstacle):
            q = np.asarray(ob.point(s), dtype=float)
            nx, ny = ob.outward_normal(np.asarray(q[0]), np.asarray(q[1]))
            d = np.array([-float(ny), float(nx)])
            Ps.append(q)
            Ds.append(d)
    if not Ps:
        return np.zeros((0, 2)), np.zeros((0, 2))
    return _back_to_outer(table, np.array(Ps), np.array(Ds))


def _back_to_outer(table: BilliardTable, Q: np.ndarray, D: np.ndarray):
    t_back, _, _ = _outer_only(table).cast(Q, -D)
    return Q - t_back[:, None] * D, D


def common_tangent_chords(table: BilliardTable) -> tuple[np.ndarray, np.ndarray]:
    """Chords along the outer common tangents of each pair of circular obstacles."""
    Ps, Ds = [], []
    circles = [o for o in table.obstacles if isinstance(o, Circle)]
    for i in range(len(circles)):
        for j in range(i + 1, len(circles)):
            c1, c2 = circles[i], circles[j]
            dx, dy = c2.cx - c1.cx, c2.cy - c1.cy
            dist = math.hypot(dx, dy)
            base = math.atan2(dy, dx)
            gamma = math.asin((c1.r - c2.r) / dist)
            for sgn in (1, -1):
                ang = base + sgn * (math.pi / 2 + gamma)
                nrm = np.array([math.cos(ang), math.sin(ang)])
                Ps.append(np.array([c1.cx, c1.cy]) + c1.r * nrm)
                Ds.append(np.array([-nrm[1], nrm[0]]))
    if not Ps:
        return np.zeros((0, 2)), np.zeros((0, 2))
    return _back_to_outer(table, np.array(Ps), np.array(Ds))


def _outer_only(table: BilliardTable) -> BilliardTable:
    t = object.__new__(BilliardTable)
    t.outer, t.obstacles, t.name, t.diam, t.tau_graze = table.outer, [], table.name, table.diam, table.tau_graze
    return t


def tangency_census(table: BilliardTable, L: int = 100000, seed: int = 0,
                    extra: tuple[np.ndarray, np.ndarray] | None = None) -> dict:
    """Histogram of m and m' over random chords, flagging bound violations.

    Tangent chords to every obstacle and common tangents of circular
    obstacle pairs are appended unless ``extra`` is given.
    """
    rng = np.random.default_rng(seed)
    P, D = _random_chords(table, L, rng)
    if extra is None:
        t1, t2 = tangent_chords(table, seed=seed), common_tangent_chords(table)
        extra = (np.vstack([t1[0], t2[0]]), np.vstack([t1[1], t2[1]]))
    if len(extra[0]):
        P = np.vstack([P, extra[0]])
        D = np.vstack([D, extra[1]])
    t_exit, curve_exit, grazes = table.cast(P, D)
    if not np.all(np.isfinite(t_exit)):
        raise NoExit("a chord found no exit")
    # outer-boundary tangency at the entry itself counts toward m
    n_grazes = np.array([len(g) for g in grazes])
    m_red = n_grazes
    m = 2 + 2 * n_grazes
    hist_m = {int(k): int(v) for k, v in zip(*np.unique(m, return_counts=True))}
    hist_mr = {int(k): int(v) for k, v in zip(*np.unique(m_red, return_counts=True))}
    violations = int(np.sum((m_red > 2) | (m > 6)))
    return {"chords": int(len(P)), "hist_m": hist_m, "hist_m_reduced": hist_mr,
            "max_m": int(m.max()), "max_m_reduced": int(m_red.max()), "violations": violations,
            "bound_m": 6, "bound_m_reduced": 2}


# ---------------------------------------------------------------- builders

def shell(R: float = 2.0, r: float = 1.0) -> BilliardTable:
    return BilliardTable(Circle(0, 0, R), [Circle(0, 0, r)], name=f"shell(R={R}, r={r})")


def two_obstacle_shell() -> BilliardTable:
    return BilliardTable(Circle(0, 0, 3.0), [Circle(-1.0, 0.5, 0.5), Circle(1.0, 0.5, 0.5)],
                         name="two-obstacle shell")


def superellipse_table(p: int = 4) -> BilliardTable:
    return BilliardTable(ImplicitCurve(f"x^{p} + y^{p} - 1", (-1.5, 1.5, -1.5, 1.5)),
                         name=f"superellipse(p={p})")


def curve_from_spec(spec: dict) -> Curve:
    kind = spec.get("kind", "circle")
    if kind == "circle":
        return Circle(float(spec.get("cx", 0)), float(spec.get("cy", 0)), float(spec["r"]))
    if kind == "ellipse":
        return Ellipse(float(spec.get("cx", 0)), float(spec.get("cy", 0)), float(spec["a"]), float(spec["b"]))
    if kind == "implicit":
        return ImplicitCurve(spec["expr"], spec["bbox"], int(spec.get("resolution", 2048)))
    raise ValueError(f"unknown curve kind {kind!r}")
