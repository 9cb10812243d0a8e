"""Scenario runners: compute invariants, judge claims, write artifacts."""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .billiards import BilliardTable, Circle, curve_from_spec, orbit, poncelet_check, tangency_census
from .causality import (MATCH_TOL, chains, compute_table, export_gv, fixed_point_report, is_strict_partial_order,
                        mirror_table, reachability_dot, reversal_residuals, semicontinuity)
from .errors import Degenerate, IllConditioned, NoExit, TimeBudgetExceeded
from .field_expr import VectorField
from .flow_sim import G_MIN, TAU_LIE, Domain2D, check_traversing, embed_alpha, strata, trace_trajectory
from .holography import graph_isomorphic, interior_graph, reconstruct
from .local_model import LocalModel, max_chain_arrows
from .omega import (chain_bound, enumerate_admissible, flip_sign_exponent, is_admissible, mirror, norm,
                    reduced_norm)
from .render import alpha_svg, billiard_svg, domain_svg, gv_svg
from .scenarios import Scenario

SIG_DIGITS = 12
PAIR_SLACK = 1e-9
JUMP_SLACK = 1e-6
REVERSAL_TOL = 1e-6
NUMERIC_ERRORS = (Degenerate, IllConditioned, NoExit, TimeBudgetExceeded)


def clean(obj):
    """JSON-ready copy with floats cut to a fixed number of significant digits."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return str(x)
        x = float(f"{x:.{SIG_DIGITS}g}")
        return 0.0 if x == 0 else x
    return obj


def dumps(obj) -> str:
    return json.dumps(clean(obj), indent=2, sort_keys=True) + "\n"


@dataclass
class Report:
    scenario: Scenario
    claims: list[dict] = field(default_factory=list)
    results: dict = field(default_factory=dict)
    artifacts: dict[str, str] = field(default_factory=dict)
    error: str | None = None

    def claim(self, name: str, module: str, passed: bool, value=None, expected=None) -> bool:
        self.claims.append({"claim": name, "module": module, "passed": bool(passed), "value": value,
                            "expected": expected, "scenario": self.scenario.name,
                            "scenario_sha256": self.scenario.digest})
        return bool(passed)

    @property
    def passed(self) -> bool:
        return self.error is None and all(c["passed"] for c in self.claims)

    @property
    def status(self) -> str:
        if self.error is not None:
            return "degenerate"
        return "pass" if self.passed else "fail"

    def as_dict(self) -> dict:
        return {"scenario": self.scenario.name, "kind": self.scenario.kind,
                "scenario_sha256": self.scenario.digest, "seed": self.scenario.seed,
                "version": __version__, "status": self.status, "error": self.error,
                "claims": self.claims, "results": self.results,
                "artifacts": sorted([*self.artifacts, "report.json"])}

    def write(self, out: Path) -> Path:
        out.mkdir(parents=True, exist_ok=True)
        for name, text in sorted(self.artifacts.items()):
            (out / name).write_text(text)
        path = out / "report.json"
        path.write_text(dumps(self.as_dict()))
        return path


def run_scenario(scn: Scenario, seed: int | None = None) -> Report:
    if seed is not None:
        scn = Scenario(scn.name, scn.kind, {**scn.data, "seed": seed}, scn.digest, scn.path)
    rep = Report(scn)
    runner = {"flow": run_flow, "billiard": run_billiard, "local_model": run_local_model,
              "poset": run_poset}[scn.kind]
    try:
        runner(scn, rep)
    except NUMERIC_ERRORS as exc:
        rep.error = f"{type(exc).__name__}: {exc}"
    if not scn.get("output", "svg", default=True):
        rep.artifacts = {k: t for k, t in rep.artifacts.items() if not k.endswith(".svg")}
    if not scn.get("output", "tables", default=True):
        rep.artifacts = {k: t for k, t in rep.artifacts.items() if not k.startswith("table.")}
    return rep


# ---------------------------------------------------------------------- flow

def build_domain(scn: Scenario, graze_scale: float = 1.0) -> tuple[Domain2D, VectorField]:
    d = Domain2D(scn.get("domain", "w"), scn.get("domain", "bbox"),
                 int(scn.get("domain", "resolution", default=2048)), name=scn.name)
    d.tau_graze *= graze_scale * float(scn.get("tolerances", "graze_scale", default=1.0))
    v = VectorField(scn.get("field", "vx"), scn.get("field", "vy"))
    return d, v


def run_flow(scn: Scenario, rep: Report) -> None:
    d, v = build_domain(scn)
    N = int(scn.get("samples", "N", default=2048))
    M = int(scn.get("samples", "interior", default=100))
    n_rev = int(scn.get("samples", "reversal", default=128))
    expected = scn.get("expected", default={})

    trav = check_traversing(d, v, M, seed=scn.seed)
    rep.results["traversing"] = trav.as_dict()
    rep.claim("field is traversing", "flow_sim", trav.passed, trav.passed, True)

    st = strata(d, v)
    rep.results["strata"] = st.as_dict()
    rep.results["boundary"] = {"components": len(d.components),
                               "lengths": [c.length for c in d.components], "diam": d.diam}
    rep.results["tolerances"] = {"tau_graze": d.tau_graze, "tau_bnd": d.tau_bnd, "tau_lie": TAU_LIE,
                                 "g_min": G_MIN, "match": MATCH_TOL}
    chi_strata = st.euler_characteristic()

    table = compute_table(d, v, N, f=scn.get("height"), st=st)
    rec = reconstruct(table)
    g = rec["graph"]
    gi = interior_graph(d, v, st=st)
    iso, mapping = graph_isomorphic(g, gi)
    labels = dict(sorted(g.label_counts().items()))
    rep.results["reconstruction"] = {
        "euler_characteristic": rec["euler_characteristic"], "strata_euler_characteristic": chi_strata,
        "fixed_points": rec["fixed_points"], "tangencies": rec["tangencies"],
        "graph": g.as_dict(), "interior_graph": gi.as_dict(),
        "isomorphism": {str(k): mapping[k] for k in sorted(mapping)} if iso else None,
        "node_labels": labels}
    if "euler_characteristic" in expected:
        rep.claim("boundary-only Euler characteristic", "holography",
                  rec["euler_characteristic"] == expected["euler_characteristic"],
                  rec["euler_characteristic"], expected["euler_characteristic"])
    rep.claim("boundary chi agrees with strata chi", "flow_sim",
              chi_strata == rec["euler_characteristic"], chi_strata, rec["euler_characteristic"])
    if "nodes" in expected:
        rep.claim("trajectory-graph node labels", "holography", labels == expected["nodes"],
                  labels, expected["nodes"])
    rep.claim("reconstructed graph isomorphic to interior graph", "holography", iso, iso, True)
    rep.claim("trajectory-graph degrees", "holography", not g.degree_violations(),
              g.degree_violations(), [])

    fp = fixed_point_report(table, d, v)
    rep.results["fixed_points"] = fp
    rep.claim("C(x) = x exactly on the singleton tangencies", "causality", fp["passed"],
              fp["min_displacement"], "> 1e-6")
    acyclic = is_strict_partial_order(table)
    rep.claim("reachability is a strict partial order", "causality", acyclic, acyclic, True)

    gv = export_gv(table, d, v)
    semi = semicontinuity(table, gv)
    rep.results["gv"] = {k: gv[k] for k in ("plus_arcs", "minus_arcs", "blocks", "checkerboard",
                                            "parity_ok", "total_variation")}
    rep.results["gv"]["discontinuities"] = gv["discontinuities"]
    rep.results["semicontinuity"] = semi
    rep.claim("G_v blocks respect the checkerboard parity", "causality", gv["parity_ok"],
              gv["parity_ok"], True)
    rep.claim("f(C(y)) - f(y) >= 0 on every row", "causality",
              semi["min_slack"] is not None and semi["min_slack"] >= -PAIR_SLACK,
              semi["min_slack"], -PAIR_SLACK)
    jump = semi.get("min_jump_slack")
    rep.claim("lower semicontinuity across jumps", "causality", jump is None or jump >= -JUMP_SLACK,
              jump, -JUMP_SLACK)

    small = compute_table(d, v, n_rev, f=scn.get("height"), st=st)
    res = reversal_residuals(d, v, small)
    rep.results["reversal"] = {"rows": len(res), "max_residual": max(res, default=0.0)}
    rep.claim("C_{-v} inverts C_v", "causality", max(res, default=0.0) <= REVERSAL_TOL,
              max(res, default=0.0), REVERSAL_TOL)
    mt = mirror_table(d, v, n_rev, st=strata(d, -v))
    fwd = Counter(str(ch.word) for ch in chains(small))
    back = Counter(str(mirror(ch.word)) for ch in chains(mt))
    rep.claim("chain words of -v mirror those of v", "causality", fwd == back,
              dict(sorted(back.items())), dict(sorted(fwd.items())))

    # a handful of trajectories for the figures and the alpha picture
    picks = [r.entry for r in table.samples()[:: max(1, len(table.samples()) // 12)]]
    picks += [p for p in st.points if p.stratum == (2, "+")]
    trs = [trace_trajectory(d, v, p, d.default_controls(v, record_path=True)) for p in picks]
    f = table.source.get("f")
    emb = embed_alpha(trs, f, v) if f is not None else []
    rep.results["alpha"] = emb

    rep.artifacts["table.csv"] = table.to_csv()
    rep.artifacts["table.json"] = table.to_json()
    rep.artifacts["graph.dot"] = g.to_dot(scn.name)
    rep.artifacts["graph.json"] = g.to_json()
    rep.artifacts["interior_graph.dot"] = gi.to_dot(scn.name + "_interior")
    rep.artifacts["poset.dot"] = reachability_dot(small)
    rep.artifacts["gv.json"] = dumps(gv)
    rep.artifacts["trajectories.csv"] = _paths_csv(trs)
    rep.artifacts["trajectories.json"] = dumps([t.as_dict() for t in trs])
    rep.artifacts["domain.svg"] = domain_svg(d, st, trs, scn.name)
    rep.artifacts["alpha.svg"] = alpha_svg(emb)
    rep.artifacts["gv.svg"] = gv_svg(gv, table.lengths)


def _paths_csv(trs) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["trajectory", "t", "x", "y"])
    for i, tr in enumerate(trs):
        for t, x, y in tr.path:
            wr.writerow([i, f"{t:.12g}", f"{x:.12g}", f"{y:.12g}"])
    return buf.getvalue()


# ------------------------------------------------------------------ billiard

def build_table(scn: Scenario) -> BilliardTable:
    spec = scn.get("table")
    return BilliardTable(curve_from_spec(spec["outer"]),
                         [curve_from_spec(o) for o in spec.get("obstacles", [])], name=scn.name)


def run_billiard(scn: Scenario, rep: Report) -> None:
    table = build_table(scn)
    rep.results["table"] = {"name": table.name, "diam": table.diam, "obstacles": len(table.obstacles)}
    states = []
    if scn.get("census") is not None:
        cen = tangency_census(table, int(scn.get("census", "chords", default=100000)), seed=scn.seed)
        rep.results["census"] = cen
        rep.claim("tangency bounds m <= 6 and m' <= 2", "billiards", cen["violations"] == 0,
                  {"max_m": cen["max_m"], "max_m_reduced": cen["max_m_reduced"]},
                  {"max_m": cen["bound_m"], "max_m_reduced": cen["bound_m_reduced"]})
        rep.artifacts["census.json"] = dumps(cen)
    if scn.get("orbit") is not None:
        o = scn.get("orbit")
        start = table.state(0, float(o.get("s", 0.0)), float(o.get("angle", 0.3)))
        states = orbit(table, start, int(o.get("steps", 1000)))
        drift = max(abs(math.hypot(*s.u) - 1.0) for s in states)
        inward = all(s.classify() == "inward" for s in states)
        rep.results["orbit"] = {"steps": len(states) - 1, "unit_speed_drift": drift, "all_inward": inward}
        rep.claim("billiard orbit keeps unit speed", "billiards", drift <= 1e-9, drift, 1e-9)
        rep.claim("billiard map returns inward states", "billiards", inward, inward, True)
        rep.artifacts["orbit.csv"] = _orbit_csv(states)
    if scn.get("poncelet") is not None:
        rep.results["poncelet"] = _poncelet(scn, table, rep)
        rep.artifacts["poncelet.json"] = dumps(rep.results["poncelet"])
    rep.artifacts["table.svg"] = billiard_svg(table, states[:200], title=scn.name)


def _poncelet(scn: Scenario, table: BilliardTable, rep: Report) -> dict:
    p = scn.get("poncelet")
    inner = curve_from_spec(p["inner"])
    outer = table.outer
    k = int(p.get("k", 3))
    rng = np.random.default_rng(scn.seed)
    starts = [outer.point(s) for s in rng.uniform(0, outer.length, int(p.get("starts", 10)))]
    res = poncelet_check(outer, inner, k, starts)
    other = poncelet_check(outer, inner, k + 1, starts)
    closes = isinstance(outer, Circle) and isinstance(inner, Circle) and \
        abs(inner.r - outer.r * math.cos(math.pi / k)) < 1e-12
    out = {"k": k, "residuals": res, "residuals_k_plus_1": other, "predicted_closure": closes}
    if closes:
        rep.claim(f"Poncelet {k}-periodic closure", "billiards", max(res) <= 1e-6, max(res), 1e-6)
        rep.claim(f"no {k + 1}-periodic closure", "billiards", min(other) >= 0.1, min(other), 0.1)
    return out


def _orbit_csv(states) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["step", "curve", "x", "y", "ux", "uy"])
    for i, s in enumerate(states):
        wr.writerow([i, s.curve, *(f"{c:.12g}" for c in (*s.xy, *s.u))])
    return buf.getvalue()


# --------------------------------------------------------------- local model

def chain_law(ms=(2, 3, 4, 5), samples: int = 1000, seed: int = 0) -> dict:
    out = {}
    for m in ms:
        top, per = max_chain_arrows(m, samples, seed=seed)
        out[m] = {"max_arrows": top, "per_radius": {str(r): k for r, k in per.items()},
                  "expected": chain_bound(m), "passed": top == chain_bound(m)}
    return out


def local_fixed_points(model: LocalModel, samples: int = 200, seed: int = 0) -> dict:
    """FIXED from the causality map against a direct sign test of P beside each root."""
    rng = np.random.default_rng(seed)
    bad = []
    fixed = 0
    for _ in range(samples):
        x = model.random_coefficients(rng)
        d = model.fiber_divisor(x)
        pos = d.positions
        for k, p in enumerate(d):
            gaps = [abs(pos[k] - pos[j]) for j in (k - 1, k + 1) if 0 <= j < len(pos)]
            h = min([1e-3, *[g / 2 for g in gaps]])
            both_out = model.evaluate(p.u - h, x) > 0 and model.evaluate(p.u + h, x) > 0
            try:
                img = model.model_causality(x, p.u)
            except Exception:  # exit end of a component
                img = None
            is_fixed = isinstance(img, str)
            fixed += is_fixed
            moved = img is None or is_fixed or abs(img - p.u) > 1e-6
            if is_fixed != both_out or not moved:
                bad.append({"x": list(x), "u": p.u, "m": p.m, "fixed": is_fixed, "isolated": both_out})
    return {"samples": samples, "fixed": fixed, "mismatches": bad[:10], "mismatch_count": len(bad)}


def run_local_model(scn: Scenario, rep: Report) -> None:
    model = LocalModel(scn.get("omega"), eps=float(scn.get("eps", default=0.1)))
    x = np.asarray(scn.get("x", default=[0.0] * model.dim), dtype=float)
    d = model.fiber_divisor(x)
    rep.results["model"] = {"omega": str(model.omega), "dim": model.dim, "x": x.tolist(),
                            "divisor": d.as_records(),
                            "components": [c.as_interval() for c in model.components(x)],
                            "chain_lengths": model.chain_lengths(x)}
    fp = local_fixed_points(model, seed=scn.seed)
    rep.results["fixed_points"] = fp
    rep.claim("FIXED exactly at isolated even roots", "local_model", fp["mismatch_count"] == 0,
              fp["mismatch_count"], 0)
    law = scn.get("chain_law")
    if law is not None:
        res = chain_law(law.get("m", [2, 3, 4, 5]), int(law.get("samples", 1000)), scn.seed)
        rep.results["chain_law"] = res
        for m, r in res.items():
            rep.claim(f"max chain arrows for m={m}", "local_model", r["passed"], r["max_arrows"],
                      r["expected"])
    rep.artifacts["divisor.json"] = dumps(rep.results["model"])


# --------------------------------------------------------------------- poset

def poset_words(max_reduced_norm: int, max_support: int) -> list[dict]:
    return [{"omega": str(w), "norm": norm(w), "reduced_norm": reduced_norm(w),
             "flip_sign_exponent": flip_sign_exponent(w), "mirror": str(mirror(w))}
            for w in enumerate_admissible(max_reduced_norm, max_support)]


def run_poset(scn: Scenario, rep: Report) -> None:
    words = poset_words(int(scn.get("max_reduced_norm")), int(scn.get("max_support")))
    rep.results["words"] = words
    ok = all(is_admissible(w["omega"]) and is_admissible(w["mirror"]) for w in words)
    rep.claim("enumerated words are admissible and closed under mirror", "omega", ok, len(words), None)
    rep.artifacts["poset.json"] = dumps(words)
