"""The acceptance suite behind ``traverse-lab selftest`` and the test module.

Each criterion returns a :class:`Check`.  Domains and the large causality
tables are shared through a :class:`Context`; the time of a criterion covers
its own tracing and table work, not the one-off boundary tracing of domains.
"""

from __future__ import annotations

import copy
import math
import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.integrate import solve_ivp

from .billiards import Circle, poncelet_check, tangency_census
from .causality import (chains, compute_table, export_gv, fixed_point_report, mirror_table,
                        reversal_residuals, semicontinuity, table_from_local_model)
from .field_expr import VectorField, as_expr, lie_jet
from .flow_sim import BoundaryPoint, strata, trace_many, trace_trajectory
from .holography import graph_isomorphic, interior_graph, reconstruct
from .local_model import LocalModel
from .omega import as_word, enumerate_by_norm, flip_sign_exponent, mirror
from .pipeline import build_domain, build_table, chain_law, local_fixed_points
from .scenarios import BILLIARD_TABLES, FLOW_SCENARIOS, builtin

EXPECTED_CHI = {"disk": 1, "annulus": 0, "blob": 0}
BUDGETS = {1: 10.0, 2: 10.0, 3: 60.0, 6: 5.0, 7: 20.0}
LOCAL_WORDS = ("2", "121", "1221", "141", "13", "31")


@dataclass
class Check:
    number: int | str
    name: str
    passed: bool
    detail: str
    seconds: float
    budget: float | None = None
    data: dict = field(default_factory=dict)

    @property
    def within_budget(self) -> bool:
        return self.budget is None or self.seconds <= self.budget

    @property
    def ok(self) -> bool:
        return self.passed and self.within_budget

    def line(self) -> str:
        tag = "PASS" if self.ok else "FAIL"
        budget = "" if self.budget is None else f" / {self.budget:.0f} s"
        return f"[{tag}] {self.number}. {self.name} ({self.seconds:.1f} s{budget}): {self.detail}"

    def as_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.ok, "claim_holds": self.passed,
                "detail": self.detail, "seconds": self.seconds, "budget": self.budget, "data": self.data}


class Context:
    """Lazily built domains and tables shared between criteria."""

    def __init__(self, seed: int = 0, N: int = 2048, n_small: int = 256):
        self.seed = seed
        self.N = N
        self.n_small = n_small
        self._domains: dict = {}
        self._tables: dict = {}

    def domain(self, name: str):
        if name not in self._domains:
            d, v = build_domain(builtin(name))
            self._domains[name] = (d, v, strata(d, v))
        return self._domains[name]

    def table(self, name: str, N: int):
        key = (name, N)
        if key not in self._tables:
            d, v, st = self.domain(name)
            self._tables[key] = compute_table(d, v, N, st=st)
        return self._tables[key]

    def warm(self, names=FLOW_SCENARIOS) -> None:
        for n in names:
            self.domain(n)


def _timed(number, name, fn, budget=None) -> Check:
    t0 = time.perf_counter()
    passed, detail, data = fn()
    return Check(number, name, bool(passed), detail, time.perf_counter() - t0, budget, data)


# ------------------------------------------------------------------ criteria

def chain_length_law(ctx: Context) -> Check:
    def body():
        res = chain_law((2, 3, 4, 5), 1000, ctx.seed)
        got = {m: r["max_arrows"] for m, r in res.items()}
        return all(r["passed"] for r in res.values()), f"max arrows {got}, floor(m/2) expected", res
    return _timed(1, "chain-length law", body, BUDGETS[1])


def fixed_point_characterization(ctx: Context) -> Check:
    def body():
        data = {"local": {}, "flow": {}}
        ok = True
        scn = builtin("local-121")
        for word in sorted({scn.get("omega"), *LOCAL_WORDS}):
            r = local_fixed_points(LocalModel(word, eps=float(scn.get("eps"))), 200, ctx.seed)
            data["local"][word] = {"fixed": r["fixed"], "mismatches": r["mismatch_count"]}
            ok &= r["mismatch_count"] == 0
        for name in FLOW_SCENARIOS:
            d, v, _ = ctx.domain(name)
            r = fixed_point_report(ctx.table(name, ctx.n_small), d, v)
            data["flow"][name] = {"fixed": r["fixed_rows"], "expected": r["expected"],
                                  "min_displacement": r["min_displacement"]}
            ok &= r["passed"]
        moves = min(f["min_displacement"] for f in data["flow"].values())
        return ok, f"FIXED rows match the singleton tangencies; min displacement elsewhere {moves:.2e}", data
    return _timed(2, "fixed-point characterization", body, BUDGETS[2])


def holographic_round_trip(ctx: Context) -> Check:
    def body():
        data = {}
        ok = True
        for name in FLOW_SCENARIOS:
            d, v, st = ctx.domain(name)
            rec = reconstruct(ctx.table(name, ctx.N))
            iso, _ = graph_isomorphic(rec["graph"], interior_graph(d, v, st=st))
            chi = rec["euler_characteristic"]
            data[name] = {"isomorphic": iso, "chi": chi, "expected_chi": EXPECTED_CHI[name],
                          "nodes": dict(sorted(rec["graph"].label_counts().items()))}
            ok &= iso and chi == EXPECTED_CHI[name]
        detail = ", ".join(f"{n}: chi={r['chi']} iso={r['isomorphic']}" for n, r in data.items())
        return ok, detail + f" (N={ctx.N})", data
    return _timed(3, "holographic round-trip", body, BUDGETS[3])


def semicontinuity_check(ctx: Context) -> Check:
    def body():
        data = {}
        ok = True
        for name in FLOW_SCENARIOS:
            d, v, _ = ctx.domain(name)
            table = ctx.table(name, ctx.N)
            semi = semicontinuity(table, export_gv(table, d, v))
            jump = semi.get("min_jump_slack")
            data[name] = {"min_slack": semi["min_slack"], "min_jump_slack": jump,
                          "jumps": len(semi["jumps"])}
            ok &= semi["min_slack"] >= -1e-9 and (jump is None or jump >= -1e-6)
        # local model fibers with f = u
        rng = np.random.default_rng(ctx.seed)
        model = LocalModel(builtin("local-121").get("omega"), eps=0.1)
        worst = math.inf
        for _ in range(200):
            t = table_from_local_model(model, model.random_coefficients(rng))
            for r in t.moving_rows:
                worst = min(worst, r.image.s - r.entry.s)
        data["local-121"] = {"min_slack": worst}
        ok &= worst >= -1e-9
        pair = min(r["min_slack"] for r in data.values())
        jumps = [r["min_jump_slack"] for r in data.values() if r.get("min_jump_slack") is not None]
        return ok, f"min pair slack {pair:.2e} (>= -1e-9), min jump slack {min(jumps, default=0):.2e} " \
                   f"(>= -1e-6)", data
    return _timed(4, "semicontinuity", body)


def brute_force_flip_parity(w) -> int:
    """Sign of the linear map induced on model coefficients by ``u -> -u``.

    Factor ``i`` becomes factor ``q - 1 - i`` of the mirrored word and its
    coefficient of ``(u - a)^l`` picks up ``(-1)^(m - l)``.  The determinant of
    that signed permutation matrix is evaluated directly.
    """
    w = as_word(w)
    q = len(w)
    src = [(i, l) for i, m in enumerate(w) for l in range(m - 1)]
    mw = mirror(w)
    dst = {s: k for k, s in enumerate((i, l) for i, m in enumerate(mw) for l in range(m - 1))}
    n = len(src)
    if n == 0:
        return 0
    A = np.zeros((n, n))
    for k, (i, l) in enumerate(src):
        A[dst[(q - 1 - i, l)], k] = (-1) ** (w[i] - l)
    return 0 if np.linalg.det(A) > 0 else 1


def reversal_mirror(ctx: Context) -> Check:
    def body():
        data = {"reversal": {}, "mirror": {}}
        ok = True
        for name in FLOW_SCENARIOS:
            d, v, _ = ctx.domain(name)
            table = ctx.table(name, ctx.n_small)
            res = max(reversal_residuals(d, v, table), default=0.0)
            fwd = Counter(str(c.word) for c in chains(table))
            mt = mirror_table(d, v, ctx.n_small, st=strata(d, -v))
            back = Counter(str(mirror(c.word)) for c in chains(mt))
            data["reversal"][name] = res
            data["mirror"][name] = {"forward": dict(fwd), "mirrored_reverse": dict(back)}
            ok &= res <= 1e-6 and fwd == back
        words = enumerate_by_norm(10)
        bad = [str(w) for w in words if flip_sign_exponent(w) != brute_force_flip_parity(w)]
        data["flip_sign"] = {"words": len(words), "mismatches": bad}
        ok &= not bad
        worst = max(data["reversal"].values())
        return ok, f"max |C_-v(C_v(p)) - p| = {worst:.2e}, chain words mirror, " \
                   f"flip-sign parity agrees on {len(words)} words", data
    return _timed(5, "reversal and mirror", body)


def poncelet_circles(ctx: Context) -> Check:
    def body():
        R = 1.0
        outer, inner = Circle(0.0, 0.0, R), Circle(0.0, 0.0, R / 2)
        rng = np.random.default_rng(ctx.seed)
        starts = [outer.point(s) for s in rng.uniform(0, outer.length, 10)]
        r3 = poncelet_check(outer, inner, 3, starts)
        r4 = poncelet_check(outer, inner, 4, starts)
        ok = max(r3) <= 1e-6 and min(r4) >= 0.1
        return ok, f"k=3 max residual {max(r3):.1e}, k=4 min residual {min(r4):.3f}", \
            {"k3": r3, "k4": r4}
    return _timed(6, "Poncelet closure", body, BUDGETS[6])


def tangency_bounds(ctx: Context) -> Check:
    def body():
        data = {}
        for name in BILLIARD_TABLES:
            cen = tangency_census(build_table(builtin(name)), 100000, seed=ctx.seed)
            data[name] = {k: cen[k] for k in ("chords", "max_m", "max_m_reduced", "violations")}
        ok = all(r["violations"] == 0 and r["max_m_reduced"] <= 2 for r in data.values())
        detail = ", ".join(f"{n}: max m'={r['max_m_reduced']}" for n, r in data.items())
        return ok, detail + " (bound 2)", data
    return _timed(7, "tangency bounds", body, BUDGETS[7])


# ----------------------------------------------------------- numeric substrate

def random_expression(rng: np.random.Generator, depth: int = 3) -> str:
    """Random smooth expression in x, y, finite on the plane."""
    if depth == 0 or rng.random() < 0.2:
        return str(rng.choice(["x", "y", f"{rng.uniform(-2, 2):.3f}"]))
    a = random_expression(rng, depth - 1)
    kind = int(rng.integers(0, 8))
    if kind < 3:
        b = random_expression(rng, depth - 1)
        return f"({a} {'+-*'[kind]} {b})"
    if kind == 3:
        return f"({a})^{int(rng.integers(2, 4))}"
    if kind == 4:
        return f"sin({a})"
    if kind == 5:
        return f"cos({a})"
    if kind == 6:
        return f"exp(0.3*sin({a}))"
    return f"sqrt(1 + ({a})^2)"


def flow_derivatives(w, v: VectorField, p, k: int, h: float = 0.05, n: int = 33) -> np.ndarray:
    """``d^j/dt^j w(phi_t(p))`` at 0 for j <= k from an accurate ODE solve.

    Samples along the flow at Chebyshev points of ``[-h, h]`` and
    differentiates the interpolant, a high-order finite difference.
    """
    w = as_expr(w)
    ts = h * np.cos(np.pi * (np.arange(n) + 0.5) / n)

    def rhs(_, z):
        return [v.vx(z[0], z[1]), v.vy(z[0], z[1])]

    vals = np.empty(n)
    for sgn in (1.0, -1.0):
        sel = ts * sgn > 0
        order = np.argsort(np.abs(ts[sel]))
        tt = ts[sel][order]
        sol = solve_ivp(rhs, (0.0, tt[-1]), [float(p[0]), float(p[1])], method="DOP853",
                        t_eval=tt, rtol=1e-13, atol=1e-14)
        vals[np.flatnonzero(sel)[order]] = [float(w(x, y)) for x, y in sol.y.T]
    c = cheb.chebfit(ts / h, vals, n - 1)
    out = []
    for j in range(k + 1):
        out.append(cheb.chebval(0.0, c) / h ** j)
        c = cheb.chebder(c)
    return np.asarray(out)


def jet_vs_fd(seed: int = 0, cases: int = 100, k: int = 3) -> dict:
    rng = np.random.default_rng(seed)
    fields = [("1", "0"), ("1 + 0.3*sin(y)", "0.5*cos(x)"), ("0.4 - y", "x + 0.2"), ("exp(0.2*x)", "0.3*y")]
    worst = 0.0
    rows = []
    for i in range(cases):
        src = random_expression(rng)
        v = VectorField(*fields[i % len(fields)])
        p = rng.uniform(-1, 1, 2)
        jet = np.asarray(lie_jet(src, v, p, k))
        fd = flow_derivatives(src, v, p, k)
        err = float(np.max(np.abs(jet - fd) / np.maximum(1.0, np.abs(fd))))
        worst = max(worst, err)
        rows.append({"expr": src, "v": str(v), "p": p.tolist(), "error": err})
    return {"cases": cases, "order": k, "max_error": worst, "worst": max(rows, key=lambda r: r["error"])}


def disk_oracle(ctx: Context, n: int = 500) -> dict:
    d, v, st = ctx.domain("disk")
    arc = st.arcs_with_sign("+")[0]
    L = d.components[0].length
    span = arc.length(L)
    rng = np.random.default_rng(ctx.seed)
    ss = (arc.s_start + span * rng.uniform(0.001, 0.999, n)) % L
    entries = []
    for s in ss:
        xy = d.point(0, s)
        entries.append(BoundaryPoint(0, float(s), (float(xy[0]), float(xy[1])), (1, "+"), 1))
    errs = []
    for e, tr in zip(entries, trace_many(d, v, entries, strict=True)):
        x, y = e.xy
        # the chord of the unit disk along +x from (x, y) exits at (sqrt(1 - y^2), y)
        ox, oy = math.sqrt(max(0.0, 1 - y * y)), y
        q = tr.divisor[-1].xy
        errs.append(math.hypot(q[0] - ox, q[1] - oy))
    return {"entries": n, "max_error": max(errs)}


def numeric_substrate(ctx: Context) -> Check:
    def body():
        jets = jet_vs_fd(ctx.seed)
        disk = disk_oracle(ctx)
        ok = jets["max_error"] <= 1e-5 and disk["max_error"] <= 1e-6
        return ok, f"jets vs FD max rel err {jets['max_error']:.1e} on {jets['cases']} cases; " \
                   f"disk chords max err {disk['max_error']:.1e} on {disk['entries']}", \
            {"jets": jets, "disk": disk}
    return _timed(8, "numeric substrate", body)


# ------------------------------------------------------------- graze probe

def graze_sensitivity(ctx: Context, graze_scale: float = 1.0, offset: float = 1e-4) -> Check:
    """Near-tangent entries must still be classified as transversal chords.

    Entries sit ``offset * diam`` of arc length on either side of the
    preimage of every interior tangency.  The true words are (11); an
    inflated graze tolerance turns them into spurious (121) tangencies.
    """
    def body():
        data = {}
        bad = 0
        total = 0
        for name in FLOW_SCENARIOS:
            d0, v, st = ctx.domain(name)
            d = copy.copy(d0)
            d.tau_graze = d0.tau_graze * graze_scale
            entries = []
            for p in st.points_with_sign("+"):
                # the preimage of a (2,+) point is the entry of its trajectory
                tr = trace_trajectory(d, v, p)
                e = tr.divisor[0]
                for sgn in (-1.0, 1.0):
                    s = (e.s + sgn * offset * d.diam) % d.components[e.component].length
                    xy = d.point(e.component, s)
                    entries.append(BoundaryPoint(e.component, float(s), (float(xy[0]), float(xy[1])),
                                                 (1, "+"), 1))
            words = [str(t.omega) for t in trace_many(d, v, entries)] if entries else []
            wrong = sum(w != "11" for w in words)
            data[name] = {"probes": len(words), "misclassified": wrong, "words": words}
            bad += wrong
            total += len(words)
        return bad == 0, f"{total - bad}/{total} near-tangent probes classified (11) " \
                         f"at graze scale {graze_scale:g}", data
    return _timed("G", "graze sensitivity", body)


CRITERIA = {
    1: chain_length_law,
    2: fixed_point_characterization,
    3: holographic_round_trip,
    4: semicontinuity_check,
    5: reversal_mirror,
    6: poncelet_circles,
    7: tangency_bounds,
    8: numeric_substrate,
}


def run_all(seed: int = 0, only=None, graze_scale: float = 1.0, ctx: Context | None = None) -> list[Check]:
    ctx = ctx or Context(seed)
    ctx.warm()
    checks = [CRITERIA[k](ctx) for k in sorted(CRITERIA) if only is None or k in only]
    if only is None or "G" in only:
        checks.append(graze_sensitivity(ctx, graze_scale))
    return checks
