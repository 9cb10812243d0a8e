"""Batched Dormand-Prince 5(4) integration of planar flows with boundary events.

Many trajectories of the same field are advanced together with per-trajectory
step sizes.  After every accepted step each trajectory is checked for

* an exit: the boundary function ``w`` turns negative;
* a graze: ``L_v w`` changes sign from - to + (a local minimum of ``w``)
  with the minimum within ``graze_tol`` of the boundary.

Event times are refined by bisection on re-integrated sub-steps from the
start of the step, then polished with one Newton correction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .field_expr import Expr, VectorField, gradient, lie_jet_batch

# Dormand-Prince tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def field_values(v: VectorField, x: np.ndarray, y: np.ndarray):
    fx, fy = v(x, y)
    return (np.broadcast_to(np.asarray(fx, dtype=float), x.shape),
            np.broadcast_to(np.asarray(fy, dtype=float), x.shape))


def dp_step(v: VectorField, x, y, h):
    """One Dormand-Prince step of size h (arrays); returns (x5, y5, errx, erry)."""
    kx, ky = [], []
    for s in range(7):
        xs, ys = x, y
        for j, a in enumerate(_A[s]):
            if a:
                xs = xs + h * a * kx[j]
                ys = ys + h * a * ky[j]
        fx, fy = field_values(v, xs, ys)
        kx.append(fx)
        ky.append(fy)
        if s == 5:
            x5 = x + h * sum(b * k for b, k in zip(_B5[:6], kx))
            y5 = y + h * sum(b * k for b, k in zip(_B5[:6], ky))
    ex = h * sum(e * k for e, k in zip(_E, kx))
    ey = h * sum(e * k for e, k in zip(_E, ky))
    return x5, y5, ex, ey


@dataclass
class Event:
    t: float
    x: float
    y: float
    kind: str  # "exit", "graze"
    second: float = 0.0  # L_v^2 w at the event, for grazes

    @property
    def point(self):
        return (self.x, self.y)


@dataclass
class TraceResult:
    start: tuple[float, float]
    events: list[Event] = field(default_factory=list)
    status: str = "running"  # "exit", "timeout", "degenerate"
    t_end: float = 0.0
    path: list[tuple[float, float, float]] | None = None

    @property
    def exit(self) -> Event | None:
        if self.events and self.events[-1].kind == "exit":
            return self.events[-1]
        return None

    @property
    def grazes(self) -> list[Event]:
        return [e for e in self.events if e.kind == "graze"]


@dataclass
class Controls:
    rtol: float = 1e-11
    atol: float = 1e-12
    max_step: float = 0.05
    t_max: float = 100.0
    graze_tol: float = 1e-7  # distance units
    time_tol: float = 1e-12
    degenerate_tol: float = 1e-6  # L_v^2 w at a graze relative to |grad w| |v|^2
    record_path: bool = False
    start_exclusion: float = 1e-7  # distance units


def _wg(w: Expr, v: VectorField, x, y, order=1):
    jets = lie_jet_batch(w, v, x, y, order)
    return jets


def _bisect(v, w, v_for_g, x0, y0, lo, hi, target_is_g, time_tol, lo_negative):
    """Vectorized bisection on sub-step lengths [lo, hi] from (x0, y0).

    Locates where the target (w, or L_v w when ``target_is_g``) switches
    between negative and nonnegative; ``lo_negative`` gives the state at lo.
    """
    def negative(hs):
        xs, ys, _, _ = dp_step(v, x0, y0, hs)
        if target_is_g:
            val = _wg(w, v_for_g, xs, ys, 1)[1]
        else:
            val = np.broadcast_to(np.asarray(w(xs, ys), dtype=float), xs.shape)
        return val < 0

    lo = lo.copy()
    hi = hi.copy()
    for _ in range(100):
        if np.all(hi - lo <= time_tol):
            break
        mid = 0.5 * (lo + hi)
        same = negative(mid) == lo_negative
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def trace_batch(w: Expr, v: VectorField, starts, controls: Controls) -> list[TraceResult]:
    """Integrate from each start until exit, timeout or degeneracy."""
    starts = np.asarray(starts, dtype=float).reshape(-1, 2)
    n = len(starts)
    results = [TraceResult(start=(float(p[0]), float(p[1]))) for p in starts]
    if n == 0:
        return results
    x = starts[:, 0].copy()
    y = starts[:, 1].copy()
    t = np.zeros(n)
    h = np.full(n, 0.1 * controls.max_step)
    active = np.ones(n, dtype=bool)
    paths = [[(0.0, float(x[i]), float(y[i]))] for i in range(n)] if controls.record_path else None

    while np.any(active):
        idx = np.flatnonzero(active)
        xi, yi, hi, ti = x[idx], y[idx], h[idx], t[idx]
        hi = np.minimum(hi, controls.max_step)
        x5, y5, ex, ey = dp_step(v, xi, yi, hi)
        scale_x = controls.atol + controls.rtol * np.maximum(np.abs(xi), np.abs(x5))
        scale_y = controls.atol + controls.rtol * np.maximum(np.abs(yi), np.abs(y5))
        err = np.maximum(np.abs(ex) / scale_x, np.abs(ey) / scale_y)
        ok = err <= 1.0
        with np.errstate(divide="ignore"):
            fac = np.where(err == 0, 5.0, np.clip(0.9 * err ** -0.2, 0.2, 5.0))
        fac = np.where(ok, fac, np.minimum(fac, 1.0))
        h[idx] = hi * fac

        acc = idx[ok]
        if acc.size == 0:
            continue
        x0, y0 = xi[ok], yi[ok]
        x1, y1 = x5[ok], y5[ok]
        hstep = hi[ok]
        t0 = ti[ok]

        j0 = _wg(w, v, x0, y0, 1)
        j1 = _wg(w, v, x1, y1, 1)
        w0, g0 = j0
        w1, g1 = j1
        gx, gy = gradient(w, x1, y1)
        gn1 = np.hypot(gx, gy)

        f1x, f1y = field_values(v, x1, y1)
        speed1 = np.hypot(f1x, f1y)
        # a step ending just short of a graze minimum has w1 ~ 0 and g1 ~ 0
        exit_mask = w1 < -controls.graze_tol * gn1
        exit_mask |= (w1 < 0) & (g1 < -1e-6 * gn1 * speed1)
        min_mask = (g0 < 0) & (g1 >= 0)

        # candidate crossing time (relative) per accepted trajectory
        event_h = np.full(acc.size, np.inf)
        event_kind = np.array([""] * acc.size, dtype=object)

        if np.any(min_mask):
            m = np.flatnonzero(min_mask)
            hm = _bisect(v, w, v, x0[m], y0[m], np.zeros(m.size), hstep[m], True,
                         controls.time_tol, True)
            xm, ym, _, _ = dp_step(v, x0[m], y0[m], hm)
            jm = _wg(w, v, xm, ym, 2)
            gxm, gym = gradient(w, xm, ym)
            dist = jm[0] / np.maximum(np.hypot(gxm, gym), 1e-300)
            near_start = np.hypot(xm - starts[acc[m], 0], ym - starts[acc[m], 1]) <= controls.start_exclusion
            graze = (np.abs(dist) <= controls.graze_tol) & ~near_start
            crossed = (dist < -controls.graze_tol) & ~near_start
            for k, jj in enumerate(m):
                if graze[k]:
                    event_h[jj] = hm[k]
                    event_kind[jj] = "graze"
                elif crossed[k]:
                    exit_mask[jj] = True
                    event_h[jj] = hm[k]  # crossing lies before the minimum
                    event_kind[jj] = "cross-before"
            graze_second = dict(zip(m[graze], jm[2][graze]))
            graze_pts = dict(zip(m[graze], zip(xm[graze], ym[graze])))
        else:
            graze_second, graze_pts = {}, {}

        ex_idx = np.flatnonzero(exit_mask)
        exit_h = {}
        if ex_idx.size:
            upper = np.where(event_kind[ex_idx] == "cross-before", event_h[ex_idx], hstep[ex_idx])
            # an exit following a graze in the same step is searched after the graze
            grazed = event_kind[ex_idx] == "graze"
            lower = np.where(grazed, np.where(grazed, event_h[ex_idx], 0.0) * (1 + 1e-9), 0.0)
            hx = _bisect(v, w, v, x0[ex_idx], y0[ex_idx], lower, upper, False,
                         controls.time_tol, False)
            # Newton polish on w along the flow
            xe, ye, _, _ = dp_step(v, x0[ex_idx], y0[ex_idx], hx)
            we, ge = _wg(w, v, xe, ye, 1)
            with np.errstate(divide="ignore", invalid="ignore"):
                corr = np.where(ge != 0, -we / ge, 0.0)
            corr = np.clip(corr, -controls.time_tol * 100, controls.time_tol * 100)
            hx = hx + corr
            for k, jj in enumerate(ex_idx):
                exit_h[jj] = hx[k]

        for k, i in enumerate(acc):
            res = results[i]
            gh = event_h[k] if event_kind[k] == "graze" else np.inf
            eh = exit_h.get(k, np.inf)
            if gh < eh:
                xm, ym = graze_pts[k]
                res.events.append(Event(float(t0[k] + gh), float(xm), float(ym), "graze",
                                        float(graze_second[k])))
                if abs(graze_second[k]) <= controls.degenerate_tol * gn1[k] * speed1[k] ** 2:
                    res.status = "degenerate"
                    active[i] = False
                    res.t_end = float(t0[k] + gh)
                    continue
            if eh < np.inf:
                xe, ye, _, _ = dp_step(v, np.array([x0[k]]), np.array([y0[k]]), np.array([eh]))
                res.events.append(Event(float(t0[k] + eh), float(xe[0]), float(ye[0]), "exit"))
                res.status = "exit"
                res.t_end = float(t0[k] + eh)
                active[i] = False
                if paths is not None:
                    paths[i].append((res.t_end, float(xe[0]), float(ye[0])))
                continue
            x[i], y[i] = x1[k], y1[k]
            t[i] = t0[k] + hstep[k]
            if paths is not None:
                paths[i].append((float(t[i]), float(x[i]), float(y[i])))
            if t[i] > controls.t_max:
                res.status = "timeout"
                res.t_end = float(t[i])
                active[i] = False

    if paths is not None:
        for res, p in zip(results, paths):
            res.path = p
    return results
