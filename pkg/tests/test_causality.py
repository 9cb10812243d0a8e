import csv
import io
import json
import math

import numpy as np
import pytest

from traverse_lab.causality import (chains, compute_table, export_gv, fixed_point_report,
                                    is_strict_partial_order, mirror_table, reachability_dot,
                                    reversal_residuals, sample_positions, semicontinuity,
                                    table_from_local_model)
from traverse_lab.flow_sim import strata
from traverse_lab.local_model import LocalModel
from traverse_lab.omega import mirror

R3 = math.sqrt(3)


@pytest.fixture(scope="module")
def disk_table(disk):
    d, v, st = disk
    return compute_table(d, v, 64, st=st)


@pytest.fixture(scope="module")
def annulus_table(annulus):
    d, v, st = annulus
    return compute_table(d, v, 64, st=st)


def test_disk_rows_follow_symmetry(disk_table):
    moving = disk_table.moving_rows
    assert len(moving) == 64
    for r in moving:
        assert r.image.xy == pytest.approx((-r.entry.xy[0], r.entry.xy[1]), abs=1e-9)
        assert r.word == "11"


def test_disk_fixed_rows(disk_table):
    pts = sorted((round(r.entry.xy[0], 9), round(r.entry.xy[1], 9)) for r in disk_table.fixed_rows)
    assert pts == [(0, -1), (0, 1)]


def test_annulus_tangent_rows(annulus_table):
    pre = [r for r in annulus_table.rows if r.kind == "preimage" and r.entry.xy[1] > 0]
    assert len(pre) == 1
    assert pre[0].entry.xy == pytest.approx((-R3, 1), abs=1e-7)
    assert pre[0].image.xy == pytest.approx((0, 1), abs=1e-7)
    cont = [r for r in annulus_table.rows if r.kind == "continuation" and r.entry.xy[1] > 0]
    assert len(cont) == 1 and cont[0].image.xy == pytest.approx((R3, 1), abs=1e-7)


def test_chains(disk_table, annulus_table):
    dc = chains(disk_table)
    assert {(str(c.word), c.arrows) for c in dc} == {("11", 1), ("2", 0)}
    ac = chains(annulus_table)
    tangent = [c for c in ac if str(c.word) == "121"]
    assert len(tangent) == 2 and all(c.arrows == 2 for c in tangent)
    assert all(c.arrows == len(c.word) - 1 for c in ac)


def test_partial_order(disk_table, annulus_table):
    assert is_strict_partial_order(disk_table)
    assert is_strict_partial_order(annulus_table)
    dot = reachability_dot(annulus_table)
    assert dot.startswith("digraph") and "->" in dot


def test_reversal(disk, annulus, disk_table, annulus_table):
    for (d, v, _), table in ((disk, disk_table), (annulus, annulus_table)):
        res = reversal_residuals(d, v, table)
        assert len(res) == len(table.moving_rows)
        assert max(res) <= 1e-6


def test_mirror_words(annulus, annulus_table):
    d, v, _ = annulus
    mt = mirror_table(d, v, 64, st=strata(d, -v))
    fwd = sorted(str(c.word) for c in chains(annulus_table))
    back = sorted(str(mirror(c.word)) for c in chains(mt))
    assert fwd == back


def test_disk_reverse_map(disk):
    d, v, _ = disk
    mt = mirror_table(d, v, 32)
    for r in mt.moving_rows:
        assert r.image.xy == pytest.approx((-r.entry.xy[0], r.entry.xy[1]), abs=1e-9)


def test_gv_disk(disk, disk_table):
    gv = export_gv(disk_table)
    assert gv["blocks"] == [[0, 0]] and gv["parity_ok"]
    assert gv["discontinuities"] == []
    # image arc length decreases monotonically as the entry moves along the + arc
    pts = gv["curves"][0]
    img = np.unwrap(np.array([p["image_s"] for p in pts]), period=2 * math.pi)
    assert np.all(np.diff(img) < 0) or np.all(np.diff(img) > 0)


def test_gv_annulus(annulus, annulus_table):
    d, v, st = annulus
    gv = export_gv(annulus_table, d, v)
    assert len(gv["plus_arcs"]) == 2 and len(gv["minus_arcs"]) == 2
    assert gv["parity_ok"]
    assert len(gv["blocks"]) == 3
    locs = sorted(d.point(dc["arc_component"], dc["location"])[1] for dc in gv["discontinuities"])
    # jumps sit at the preimages (-sqrt 3, +-1) of the inner tangencies
    assert locs == pytest.approx([-1, 1], abs=1e-6)
    for dc in gv["discontinuities"]:
        xy = d.point(dc["arc_component"], dc["location"])
        assert xy[0] == pytest.approx(-R3, abs=1e-5)


def test_semicontinuity(annulus, annulus_table):
    d, v, _ = annulus
    semi = semicontinuity(annulus_table, export_gv(annulus_table, d, v))
    assert semi["min_slack"] >= -1e-9
    assert semi["min_jump_slack"] >= -1e-6
    assert len(semi["jumps"]) == 2


def test_refinement_idempotence(annulus):
    d, v, st = annulus
    coarse = compute_table(d, v, 32, st=st, offset=0.5)
    fine = compute_table(d, v, 64, st=st, offset=0.0)
    index = {(r.entry.component, round(r.entry.s, 9)): r for r in fine.samples()}
    matched = 0
    for r in coarse.samples():
        other = index.get((r.entry.component, round(r.entry.s, 9)))
        if other is None:
            continue
        matched += 1
        assert other.image.component == r.image.component
        assert abs(coarse.arc_delta(r.image.component, r.image.s, other.image.s)) <= 1e-6
    assert matched == len(coarse.samples())


def test_sample_positions_cover_plus_arcs(annulus):
    d, v, st = annulus
    pos = sample_positions(st, [c.length for c in d.components], 16)
    assert len(pos) == 16 * len(st.arcs_with_sign("+"))


def test_fixed_point_report(disk, annulus, disk_table, annulus_table):
    for (d, v, _), table in ((disk, disk_table), (annulus, annulus_table)):
        rep = fixed_point_report(table, d, v)
        assert rep["passed"], rep
        assert rep["expected"] == 2 and all(rep["retraced_singletons"])


def test_serialization(annulus_table):
    payload = json.loads(annulus_table.to_json())
    assert len(payload["rows"]) == len(annulus_table)
    assert payload["rows"][0]["image"] in ("FIXED",) or isinstance(payload["rows"][0]["image"], dict)
    rows = list(csv.DictReader(io.StringIO(annulus_table.to_csv())))
    assert len(rows) == len(annulus_table)
    assert sum(r["image_component"] == "FIXED" for r in rows) == 2


def test_local_model_table():
    m = LocalModel("121", alphas=(-1.0, 0.0, 1.0))
    t = table_from_local_model(m, [0.0])
    (ch,) = chains(t)
    assert str(ch.word) == "121" and ch.arrows == 2
    t = table_from_local_model(LocalModel("2", alphas=(0.0,)), [0.0])
    assert len(t.fixed_rows) == 1
    assert str(chains(t)[0].word) == "2"


def test_empty_fixed_rows_local():
    t = table_from_local_model(LocalModel("121", alphas=(-1.0, 0.0, 1.0)), [0.05])
    assert t.fixed_rows == []
