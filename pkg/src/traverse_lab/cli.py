"""``traverse-lab`` command-line front end.

Exit codes: 0 success, 1 internal error, 2 configuration error, 3 numeric
degeneracy or a failed claim.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .errors import ConfigError, Degenerate, IllConditioned, NoExit, NotInDomain, TimeBudgetExceeded
from .pipeline import chain_law, dumps, poset_words, run_scenario
from .scenarios import BUILTIN, Scenario, load

EXIT_OK, EXIT_INTERNAL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
DEFAULT_OUT = "traverse-lab-out"
NUMERIC = (Degenerate, IllConditioned, NoExit, NotInDomain, TimeBudgetExceeded)


def out_dir(args) -> Path:
    env = os.environ.get("TRAVERSE_LAB_OUT")
    return Path(env or args.out or DEFAULT_OUT)


def _emit(args, payload: dict, lines: list[str]) -> None:
    if args.json:
        sys.stdout.write(dumps(payload))
    else:
        for line in lines:
            print(line)


# ----------------------------------------------------------------------- run

def _run_one(scn: Scenario, seed, out: str) -> dict:
    rep = run_scenario(scn, seed)
    path = rep.write(Path(out) / scn.name)
    failed = [c["claim"] for c in rep.claims if not c["passed"]]
    return {"scenario": scn.name, "status": rep.status, "report": str(path), "failed": failed,
            "error": rep.error}


def cmd_run(args) -> int:
    scenarios = [load(p) for p in args.scenarios]
    names = [s.name for s in scenarios]
    if len(set(names)) != len(names):
        raise ConfigError(f"scenario names must be unique, got {names}")
    out = out_dir(args)
    jobs = max(1, args.jobs)
    if jobs > 1 and len(scenarios) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(scenarios))) as pool:
            results = list(pool.map(_run_one, scenarios, [args.seed] * len(scenarios),
                                    [str(out)] * len(scenarios)))
    else:
        results = [_run_one(s, args.seed, str(out)) for s in scenarios]
    lines = []
    for r in results:
        extra = f" [{r['error']}]" if r["error"] else (f" failed: {', '.join(r['failed'])}" if r["failed"] else "")
        lines.append(f"{r['scenario']}: {r['status']} -> {r['report']}{extra}")
    _emit(args, {"out": str(out), "scenarios": results}, lines)
    return EXIT_OK if all(r["status"] == "pass" for r in results) else EXIT_NUMERIC


# ------------------------------------------------------------------ selftest

def cmd_selftest(args) -> int:
    from .acceptance import run_all

    only = None
    if args.only:
        only = {int(k) if k.isdigit() else k.upper() for k in args.only.split(",")}
    checks = run_all(seed=args.seed or 0, only=only, graze_scale=args.graze_scale)
    ok = all(c.ok for c in checks)
    payload = {"passed": ok, "graze_scale": args.graze_scale, "checks": [c.as_dict() for c in checks]}
    lines = [c.line() for c in checks] + [f"selftest: {'PASS' if ok else 'FAIL'}"]
    _emit(args, payload, lines)
    if args.out or os.environ.get("TRAVERSE_LAB_OUT"):
        out = out_dir(args)
        out.mkdir(parents=True, exist_ok=True)
        (out / "selftest.json").write_text(dumps(payload))
    return EXIT_OK if ok else EXIT_NUMERIC


# --------------------------------------------------------------------- poset

def cmd_poset(args) -> int:
    if args.max_reduced_norm < 0 or args.max_support < 0:
        raise ConfigError("bounds must be nonnegative")
    words = poset_words(args.max_reduced_norm, args.max_support)
    lines = [f"{w['omega']}\tnorm={w['norm']}\treduced={w['reduced_norm']}\t"
             f"flip={w['flip_sign_exponent']}" for w in words]
    _emit(args, {"max_reduced_norm": args.max_reduced_norm, "max_support": args.max_support,
                 "words": words}, lines)
    return EXIT_OK


# --------------------------------------------------------------- local model

def _floats(text: str | None) -> list[float] | None:
    if text is None:
        return None
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse coefficient list {text!r}") from exc


def cmd_local_model(args) -> int:
    from .local_model import LocalModel

    try:
        model = LocalModel(args.omega, eps=args.eps)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    x = _floats(args.x)
    x = np.zeros(model.dim) if x is None else np.asarray(x)
    if x.shape != (model.dim,):
        raise ConfigError(f"word {model.omega} needs {model.dim} coefficients, got {len(x)}")
    d = model.fiber_divisor(x)
    arrows = []
    for p in d:
        try:
            img = model.model_causality(x, p.u)
        except NotInDomain:
            img = None
        arrows.append({"u": p.u, "image": img})
    payload = {"omega": str(model.omega), "x": x.tolist(), "divisor": d.as_records(),
               "word": str(d.word), "components": [c.as_interval() for c in model.components(x)],
               "chain_lengths": model.chain_lengths(x), "causality": arrows}
    lines = [f"omega {model.omega}, x = {x.tolist()}", f"fiber word {d.word}"]
    lines += [f"  u={p.u:.9g} m={p.m} polarity={p.polarity} -> "
              f"{'exit' if a['image'] is None else a['image']}" for p, a in zip(d, arrows)]
    code = EXIT_OK
    if args.chain_law:
        law = chain_law(samples=args.samples, seed=args.seed or 0)
        payload["chain_law"] = law
        lines += [f"m={m}: max arrows {r['max_arrows']} (floor(m/2) = {r['expected']})"
                  for m, r in law.items()]
        if not all(r["passed"] for r in law.values()):
            code = EXIT_NUMERIC
    _emit(args, payload, lines)
    return code


# ------------------------------------------------------------------ billiard

def cmd_billiard(args) -> int:
    scn = load(args.table)
    if scn.kind != "billiard":
        raise ConfigError(f"{args.table} is a {scn.kind} scenario, not a billiard table")
    data = dict(scn.data)
    if args.chords is not None:
        data["census"] = {"chords": args.chords}
    if args.steps is not None:
        data["orbit"] = {**data.get("orbit", {}), "steps": args.steps}
    scn = Scenario(scn.name, scn.kind, data, scn.digest, scn.path)
    rep = run_scenario(scn, args.seed)
    path = rep.write(out_dir(args) / scn.name)
    lines = [f"{c['claim']}: {'PASS' if c['passed'] else 'FAIL'} ({c['value']})" for c in rep.claims]
    lines.append(f"{scn.name}: {rep.status} -> {path}")
    _emit(args, {"report": str(path), **json.loads(dumps(rep.as_dict()))}, lines)
    return EXIT_OK if rep.status == "pass" else EXIT_NUMERIC


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="DIR", help=f"output directory (default {DEFAULT_OUT}; "
                        "TRAVERSE_LAB_OUT overrides)")
    common.add_argument("--seed", type=int, metavar="N", help="override the scenario seed")
    common.add_argument("--jobs", type=int, default=1, metavar="N", help="scenarios run in parallel")
    common.add_argument("--json", action="store_true", help="machine-readable output on stdout")

    p = argparse.ArgumentParser(prog="traverse-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", parents=[common], help="run scenario files and write reports")
    r.add_argument("scenarios", nargs="+", help="TOML files or built-in names: " + ", ".join(BUILTIN))
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    s.add_argument("--graze-scale", type=float, default=1.0, help="multiply the graze tolerance")
    s.add_argument("--only", help="comma-separated criteria, e.g. 1,6,G")
    s.set_defaults(func=cmd_selftest)

    q = sub.add_parser("poset", parents=[common], help="list admissible multiplicity words")
    q.add_argument("--max-reduced-norm", type=int, required=True)
    q.add_argument("--max-support", type=int, required=True)
    q.set_defaults(func=cmd_poset)

    m = sub.add_parser("local-model", parents=[common], help="fiber divisor of a polynomial local model")
    m.add_argument("--omega", required=True, help="multiplicity word such as 121")
    m.add_argument("--x", help="coefficient vector, comma separated (default 0)")
    m.add_argument("--eps", type=float, default=0.1)
    m.add_argument("--chain-law", action="store_true", help="also check max chain length = floor(m/2)")
    m.add_argument("--samples", type=int, default=1000)
    m.set_defaults(func=cmd_local_model)

    b = sub.add_parser("billiard", parents=[common], help="billiard census, orbit and Poncelet checks")
    b.add_argument("table", help="billiard scenario file or built-in name")
    b.add_argument("--chords", type=int, help="random chords for the tangency census")
    b.add_argument("--steps", type=int, help="orbit length")
    b.set_defaults(func=cmd_billiard)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selftest" and args.graze_scale <= 0:
        print("error: --graze-scale must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC as exc:
        print(f"numeric degeneracy: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
