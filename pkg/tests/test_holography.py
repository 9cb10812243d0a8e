import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from traverse_lab.causality import compute_table, table_from_local_model
from traverse_lab.holography import (TrajectoryGraph, build_trajectory_graph, detect_fixed_points,
                                     detect_tangency_chains, euler_characteristic, graph_isomorphic,
                                     interior_graph, reconstruct)
from traverse_lab.local_model import LocalModel

N = 256


@pytest.fixture(scope="module")
def disk_rec(disk):
    d, v, st = disk
    t = compute_table(d, v, N, st=st)
    return t, reconstruct(t)


@pytest.fixture(scope="module")
def annulus_rec(annulus):
    d, v, st = annulus
    t = compute_table(d, v, N, st=st)
    return t, reconstruct(t)


def _nx(g: TrajectoryGraph) -> nx.MultiGraph:
    h = nx.MultiGraph()
    for i, n in enumerate(g.nodes):
        h.add_node(i, label=str(n.label))
    for e in g.edges:
        h.add_edge(e.a, e.b, label=str(e.label))
    return h


def _nx_iso(g1, g2) -> bool:
    return nx.is_isomorphic(_nx(g1), _nx(g2), node_match=lambda a, b: a["label"] == b["label"],
                            edge_match=lambda a, b: sorted(x["label"] for x in a.values()) ==
                            sorted(x["label"] for x in b.values()))


def test_disk_fixed_points(disk_rec):
    t, rec = disk_rec
    pts = sorted(rec["fixed_points"], key=lambda f: f["xy"][1])
    assert len(pts) == 2
    for f, y in zip(pts, (-1, 1)):
        assert math.hypot(f["xy"][0], f["xy"][1] - y) <= 2 * math.pi / N
        assert f["m"] == 2 and f["polarity"] == "-"


def test_annulus_detectors(annulus_rec):
    t, rec = annulus_rec
    fp = sorted(f["xy"][1] for f in rec["fixed_points"])
    assert fp == pytest.approx([-2, 2], abs=1e-6)
    tan = rec["tangencies"]
    assert sorted(round(f["xy"][1], 6) for f in tan) == [-1, 1]
    assert all(f["m"] == 2 and f["polarity"] == "+" for f in tan)


def test_disk_has_no_tangency_chains(disk_rec):
    assert detect_tangency_chains(disk_rec[0]) == []


def test_local_model_tangency():
    t = table_from_local_model(LocalModel("121", alphas=(-1.0, 0.0, 1.0)), [0.0])
    (tan,) = detect_tangency_chains(t)
    assert tan["xy"][0] == pytest.approx(0.0) and tan["m"] == 2
    assert detect_fixed_points(table_from_local_model(LocalModel("121"), [0.05])) == []


def test_euler_characteristic(disk_rec, annulus_rec):
    assert euler_characteristic(disk_rec[0]) == 1
    assert euler_characteristic(annulus_rec[0]) == 0


def test_disk_reversed_chi(disk):
    d, v, _ = disk
    assert euler_characteristic(compute_table(d, -v, 64)) == 1


def test_disk_graph_is_labeled_path(disk_rec):
    g = disk_rec[1]["graph"]
    assert sorted(str(n.label) for n in g.nodes) == ["2", "2"]
    assert len(g.edges) == 1 and str(g.edges[0].label) == "11"
    assert g.euler_characteristic() == 1


def test_annulus_graph(annulus_rec):
    g = annulus_rec[1]["graph"]
    assert g.label_counts() == {"2": 2, "121": 2}
    junctions = [i for i, n in enumerate(g.nodes) if str(n.label) == "121"]
    assert all(g.degree(j) == 3 for j in junctions)
    between = [e for e in g.edges if {e.a, e.b} == set(junctions)]
    assert len(between) == 2
    assert g.euler_characteristic() == 0 and not g.degree_violations()


def test_round_trip(disk, annulus, disk_rec, annulus_rec):
    for (d, v, st), (_, rec) in ((disk, disk_rec), (annulus, annulus_rec)):
        gi = interior_graph(d, v, st=st)
        ok, mapping = graph_isomorphic(rec["graph"], gi)
        assert ok and _nx_iso(rec["graph"], gi)
        for a, b in mapping.items():
            assert rec["graph"].nodes[a].label == gi.nodes[b].label


def test_disk_vs_annulus_not_isomorphic(disk_rec, annulus_rec):
    ok, _ = graph_isomorphic(disk_rec[1]["graph"], annulus_rec[1]["graph"])
    assert not ok


def test_single_arc_without_tangencies():
    t = table_from_local_model(LocalModel("11", alphas=(0.0, 1.0)), np.zeros(0))
    assert detect_tangency_chains(t) == [] and detect_fixed_points(t) == []


def test_serialization(annulus_rec):
    g = annulus_rec[1]["graph"]
    assert g.to_dot().startswith("graph")
    assert '"121"' in g.to_json() or "121" in g.to_json()
    assert g.mirrored().label_counts() == g.label_counts()


def _random_graph(draw_edges, labels):
    g = TrajectoryGraph()
    for lab in labels:
        g.add_node(lab)
    for a, b, lab in draw_edges:
        if a < len(labels) and b < len(labels):
            g.add_edge(a, b, lab)
    return g


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(["2", "121", "1221"]), min_size=1, max_size=6),
       st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5), st.sampled_from(["11", "121"])),
                max_size=8),
       st.randoms(use_true_random=False))
def test_isomorphism_agrees_with_networkx(labels, edges, rnd):
    g1 = _random_graph(edges, labels)
    perm = list(range(len(labels)))
    rnd.shuffle(perm)
    g2 = TrajectoryGraph()
    inv = {p: i for i, p in enumerate(perm)}
    for k in range(len(labels)):
        g2.add_node(labels[inv[k]])
    for e in g1.edges:
        g2.add_edge(perm[e.a], perm[e.b], e.label)
    assert graph_isomorphic(g1, g2)[0]
    # perturb one edge label and compare against networkx
    g3 = TrajectoryGraph()
    for n in g2.nodes:
        g3.add_node(n.label)
    for i, e in enumerate(g2.edges):
        g3.add_edge(e.a, e.b, "1221" if i == 0 else e.label)
    assert graph_isomorphic(g1, g3)[0] == _nx_iso(g1, g3)
