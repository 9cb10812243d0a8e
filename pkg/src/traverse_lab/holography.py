"""Reconstruction of the trajectory space from boundary causality data alone.

Rows of a causality table are glued by union-find: two boundary points are
identified when one is reached from the other by iterating ``C``.  Special
classes (singletons, tangent trajectories) become the nodes of the
trajectory graph; runs of ordinary exits along the exit arcs become its
edges.  An independent graph is built from interior integration so that the
two can be compared.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .causality import CausalityTable, PointIndex, Row, chains
from .errors import Ambiguous
from .field_expr import VectorField
from .flow_sim import BoundaryPoint, Domain2D, Strata, strata, trace_trajectory
from .integrate import trace_batch
from .omega import OmegaWord, chain_bound, mirror



# --------------------------------------------------------------------- graph

@dataclass
class Node:
    label: OmegaWord
    witnesses: list = field(default_factory=list)
    kind: str = ""


@dataclass
class Edge:
    a: int
    b: int
    label: OmegaWord
    witnesses: list = field(default_factory=list)


@dataclass
class TrajectoryGraph:
    nodes: list[Node] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)

    def add_node(self, label, witnesses=(), kind="") -> int:
        self.nodes.append(Node(OmegaWord.parse(label) if isinstance(label, str) else label,
                               list(witnesses), kind))
        return len(self.nodes) - 1

    def add_edge(self, a: int, b: int, label="11", witnesses=()) -> None:
        self.edges.append(Edge(a, b, OmegaWord.parse(label) if isinstance(label, str) else label,
                               list(witnesses)))

    def degree(self, n: int) -> int:
        return sum((e.a == n) + (e.b == n) for e in self.edges)

    def euler_characteristic(self) -> int:
        return len(self.nodes) - len(self.edges)

    def label_counts(self) -> Counter:
        return Counter(str(n.label) for n in self.nodes)

    def degree_violations(self) -> list[str]:
        """Nodes whose degree disagrees with their label (leaf for (2), Y for (121))."""
        out = []
        expected = {"2": 1, "121": 3}
        for i, n in enumerate(self.nodes):
            want = expected.get(str(n.label))
            if want is not None and self.degree(i) != want:
                out.append(f"node {i} {n.label} has degree {self.degree(i)}")
        return out

    def as_dict(self) -> dict:
        return {"nodes": [{"id": i, "label": str(n.label), "kind": n.kind, "degree": self.degree(i)}
                          for i, n in enumerate(self.nodes)],
                "edges": [{"a": e.a, "b": e.b, "label": str(e.label), "witnesses": len(e.witnesses)}
                          for e in self.edges],
                "euler_characteristic": self.euler_characteristic()}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=1, sort_keys=True)

    def to_dot(self, name: str = "trajectories") -> str:
        lines = [f"graph {name} {{"]
        for i, n in enumerate(self.nodes):
            lines.append(f'  n{i} [label="({n.label})"];')
        for e in self.edges:
            lines.append(f'  n{e.a} -- n{e.b} [label="({e.label})"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def mirrored(self) -> "TrajectoryGraph":
        g = TrajectoryGraph()
        for n in self.nodes:
            g.nodes.append(Node(mirror(n.label), list(n.witnesses), n.kind))
        for e in self.edges:
            g.edges.append(Edge(e.b, e.a, mirror(e.label), list(e.witnesses)))
        return g


def graph_isomorphic(g1: TrajectoryGraph, g2: TrajectoryGraph):
    """Label-preserving multigraph isomorphism by backtracking.

    Returns ``(True, mapping)`` or ``(False, None)``.
    """
    n = len(g1.nodes)
    if n != len(g2.nodes) or len(g1.edges) != len(g2.edges):
        return False, None
    if n > 64:
        raise ValueError("graphs with more than 64 nodes are not supported")

    def multiplicities(g):
        m = Counter()
        for e in g.edges:
            a, b = sorted((e.a, e.b))
            m[(a, b, str(e.label))] += 1
        return m

    m1, m2 = multiplicities(g1), multiplicities(g2)
    sig1 = [(str(x.label), g1.degree(i)) for i, x in enumerate(g1.nodes)]
    sig2 = [(str(x.label), g2.degree(i)) for i, x in enumerate(g2.nodes)]
    if Counter(sig1) != Counter(sig2):
        return False, None
    order = sorted(range(n), key=lambda i: (Counter(sig1)[sig1[i]], sig1[i]))
    mapping: dict[int, int] = {}
    used = set()

    def consistent(i: int, j: int) -> bool:
        for (a, b, lab), c in m1.items():
            if i not in (a, b):
                continue
            other = b if a == i else a
            if other == i:
                if m2.get((j, j, lab), 0) != c:
                    return False
            elif other in mapping:
                x, y = sorted((j, mapping[other]))
                if m2.get((x, y, lab), 0) != c:
                    return False
        return True

    def search(k: int) -> bool:
        if k == n:
            return True
        i = order[k]
        for j in range(n):
            if j in used or sig2[j] != sig1[i]:
                continue
            if not consistent(i, j):
                continue
            mapping[i] = j
            used.add(j)
            if search(k + 1):
                return True
            del mapping[i]
            used.discard(j)
        return False

    if search(0):
        # every edge class must match once all nodes are placed
        mapped = Counter()
        for (a, b, lab), c in m1.items():
            x, y = sorted((mapping[a], mapping[b]))
            mapped[(x, y, lab)] += c
        if mapped == m2:
            return True, dict(mapping)
    return False, None


# ------------------------------------------------------------ union-find

class _UnionFind:
    def __init__(self):
        self.parent: dict[int, int] = {}

    def find(self, a: int) -> int:
        self.parent.setdefault(a, a)
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def trajectory_classes(table: CausalityTable):
    """Union-find quotient of the table's points under iterated C."""
    idx = PointIndex()
    uf = _UnionFind()
    for r in table.rows:
        a = idx.key(r.entry)
        uf.find(a)
        if r.image is not None:
            uf.union(a, idx.key(r.image))
    classes: dict[int, list[int]] = {}
    for k in range(len(idx.points)):
        classes.setdefault(uf.find(k), []).append(k)
    return idx, uf, classes


# ----------------------------------------------------------------- detectors

def _cluster_radius(table: CausalityTable) -> float:
    n = table.source.get("N", 64)
    if table.lengths:
        return 4 * max(table.lengths) / n
    return 0.25


def detect_fixed_points(table: CausalityTable) -> list[dict]:
    """Clusters of FIXED rows refined to point estimates."""
    fixed = table.fixed_rows
    clusters: list[list[Row]] = []
    for r in fixed:
        for c in clusters:
            q = c[0].entry
            if q.component == r.entry.component and np.hypot(q.xy[0] - r.entry.xy[0],
                                                             q.xy[1] - r.entry.xy[1]) <= _cluster_radius(table) / 4:
                c.append(r)
                break
        else:
            clusters.append([r])
    out = []
    rho = _cluster_radius(table)
    all_chains = chains(table) if clusters else []
    for c in clusters:
        xy = np.mean([r.entry.xy for r in c], axis=0)
        s = float(np.mean([r.entry.s for r in c]))
        local = _localized_arrows(all_chains, xy, c[0].entry.component, rho)
        k = max(local, 1)
        if k > chain_bound(3):
            raise Ambiguous(f"{k} localized arrows near the fixed point {tuple(xy)}")
        out.append({"component": c[0].entry.component, "s": s, "xy": (float(xy[0]), float(xy[1])),
                    "rows": len(c), "localized_arrows": local, "m": 2 * k, "polarity": "-"})
    return out


def _localized_arrows(all_chains, xy, component: int, rho: float) -> int:
    best = 0
    for ch in all_chains:
        pts = [p for p in ch.points if p.component == component]
        if len(pts) == len(ch.points) and all(np.hypot(p.xy[0] - xy[0], p.xy[1] - xy[1]) <= rho for p in pts):
            best = max(best, ch.arrows)
    return best


def detect_tangency_chains(table: CausalityTable) -> list[dict]:
    """Interior points of multi-arrow chains, with multiplicity estimates."""
    idx = PointIndex()
    continuations: dict[int, list[Row]] = {}
    for r in table.rows:
        if r.kind == "continuation":
            continuations.setdefault(idx.key(r.entry), []).append(r)
    out = []
    for k, rows in continuations.items():
        p = idx.points[k]
        # one continuation leaves a simple tangency; more would need m >= 4
        arrows = len({(round(r.image.xy[0], 6), round(r.image.xy[1], 6)) for r in rows})
        if arrows > chain_bound(3):
            raise Ambiguous(f"{arrows} continuations leave {p.xy}")
        out.append({"component": p.component, "s": p.s, "xy": p.xy, "localized_arrows": arrows,
                    "m": 2 * arrows, "polarity": "+", "word": rows[0].word})
    out.sort(key=lambda d: (d["component"], d["s"]))
    return out


def euler_characteristic(table: CausalityTable) -> int:
    """Number of proper entry arcs minus number of interior tangencies."""
    if table.strata is not None:
        arcs = sum(1 for a in table.strata.arcs_with_sign("+") if not a.closed)
    else:
        arcs = len({r.arc for r in table.samples() if r.arc is not None})
    return arcs - len(detect_tangency_chains(table))


# ------------------------------------------------------------ reconstruction

def build_trajectory_graph(table: CausalityTable) -> TrajectoryGraph:
    st: Strata = table.strata
    if st is None:
        raise ValueError("table carries no boundary strata")
    idx, uf, classes = trajectory_classes(table)
    words: dict[int, OmegaWord] = {}
    for ch in chains(table):
        words[uf.find(idx.key(ch.points[0]))] = ch.word
    g = TrajectoryGraph()
    node_of_class: dict[int, int] = {}
    for root in sorted(classes):
        w = words.get(root)
        if w is not None and str(w) != "11":
            node_of_class[root] = g.add_node(w, [idx.points[k] for k in classes[root]],
                                             "fixed" if len(w) == 1 else "junction")

    def node_at(p: BoundaryPoint) -> int:
        root = uf.find(idx.key(p))
        if root not in node_of_class:
            label = "2" if p.stratum == (2, "-") else "121"
            node_of_class[root] = g.add_node(label, [p], "unmatched")
        return node_of_class[root]

    # exits on each exit arc, ordered along the arc
    exits: list[tuple[int, float, str, BoundaryPoint]] = []
    for r in table.rows:
        if r.image is None or r.image.m != 1:
            continue
        root = uf.find(idx.key(r.entry))
        special = root in node_of_class
        exits.append((r.image.component, r.image.s, "special" if special else "plain", r.image))
    for arc in st.arcs_with_sign("-"):
        L = table.lengths[arc.component]
        on_arc = [e for e in exits if e[0] == arc.component and arc.contains(e[1], L)]
        on_arc.sort(key=lambda e: (e[1] - arc.s_start) % L)
        if arc.closed:
            breaks = [i for i, e in enumerate(on_arc) if e[2] == "special"]
            if not breaks:
                n = g.add_node("11", [], "dummy")
                g.add_edge(n, n, "11", [e[3] for e in on_arc])
                continue
            k0 = breaks[0]
            on_arc = on_arc[k0:] + on_arc[:k0]
            first = node_at(on_arc[0][3])
            seq = [("node", first)]
            for e in on_arc[1:]:
                seq.append(("node", node_at(e[3])) if e[2] == "special" else ("plain", e[3]))
            seq.append(("node", first))
        else:
            start = _endpoint(st, arc.component, arc.s_start)
            end = _endpoint(st, arc.component, arc.s_end)
            seq = [("node", node_at(start))]
            for e in on_arc:
                seq.append(("node", node_at(e[3])) if e[2] == "special" else ("plain", e[3]))
            seq.append(("node", node_at(end)))
        run: list = []
        left = seq[0][1]
        for kind, val in seq[1:]:
            if kind == "plain":
                run.append(val)
                continue
            if run:
                g.add_edge(left, val, "11", run)
            run = []
            left = val
    return g


def _endpoint(st: Strata, component: int, s: float) -> BoundaryPoint:
    best = min((p for p in st.points if p.component == component), key=lambda p: abs(p.s - s))
    return best


def reconstruct(table: CausalityTable) -> dict:
    """Everything recoverable from the table: strata estimates, graph, chi."""
    g = build_trajectory_graph(table)
    return {"fixed_points": detect_fixed_points(table),
            "tangencies": detect_tangency_chains(table),
            "euler_characteristic": euler_characteristic(table),
            "graph": g}


# ------------------------------------------------------------- ground truth

def interior_graph(d: Domain2D, v, grid: int = 241, st: Strata | None = None) -> TrajectoryGraph:
    """Trajectory graph from interior integration.

    Nodes are singular trajectories (singletons and tangent trajectories);
    edges are connected components of the interior after removing them.
    """
    v = VectorField.of(v)
    st = st or strata(d, v)
    g = TrajectoryGraph()
    polylines: list[np.ndarray] = []
    owners: list[int] = []
    seen_plus: list[BoundaryPoint] = []
    for p in st.points:
        if p.stratum == (2, "-"):
            n = g.add_node("2", [p], "fixed")
            polylines.append(np.array([p.xy]))
            owners.append(n)
            continue
        if any(np.hypot(p.xy[0] - q.xy[0], p.xy[1] - q.xy[1]) < 1e-9 for q in seen_plus):
            continue
        tr = trace_trajectory(d, v, p, d.default_controls(v, record_path=True, max_step=d.diam / 400))
        seen_plus.extend(q for q in tr.divisor if q.m == 2)
        n = g.add_node(tr.omega, tr.divisor, "junction")
        polylines.append(np.array([(x, y) for (_, x, y) in tr.path]))
        owners.append(n)
    xmin, xmax, ymin, ymax = d.bbox
    xs = np.linspace(xmin, xmax, grid)
    ys = np.linspace(ymin, ymax, grid)
    X, Y = np.meshgrid(xs, ys)
    cell = max(xs[1] - xs[0], ys[1] - ys[0])
    inside = np.asarray(d.w(X, Y)) > 0
    dense = [_densify(pl, cell / 4) for pl in polylines]
    free = inside.copy()
    pts = np.column_stack([X.ravel(), Y.ravel()])
    for pl in dense:
        if len(pl) > 1:
            dist, _ = cKDTree(pl).query(pts)
            free &= (dist > 1.5 * cell).reshape(X.shape)
    labels, count = ndimage.label(free)
    for comp in range(1, count + 1):
        mask = labels == comp
        cpts = pts[mask.ravel()]
        touch = []
        for n, pl in zip(owners, dense):
            dist, _ = cKDTree(pl).query(cpts)
            if np.min(dist) <= 3.5 * cell:
                touch.append(n)
        touch = sorted(set(touch))
        word = _strip_word(d, v, cpts)
        if len(touch) == 2:
            g.add_edge(touch[0], touch[1], word, [])
        elif len(touch) == 1:
            g.add_edge(touch[0], touch[0], word, [])
        elif not touch:
            n = g.add_node("11", [], "dummy")
            g.add_edge(n, n, word, [])
        else:
            raise Ambiguous(f"interior strip touches {len(touch)} singular trajectories")
    return g


def _densify(pl: np.ndarray, h: float) -> np.ndarray:
    if len(pl) < 2:
        return pl
    out = [pl[:1]]
    for a, b in zip(pl[:-1], pl[1:]):
        k = max(1, int(np.ceil(np.hypot(*(b - a)) / h)))
        t = np.linspace(0, 1, k + 1)[1:, None]
        out.append(a + t * (b - a))
    return np.vstack(out)


def _strip_word(d: Domain2D, v: VectorField, cpts: np.ndarray) -> str:
    p = cpts[len(cpts) // 2]
    c = d.default_controls(v)
    fwd = trace_batch(d.w, v, [p], c)[0]
    bwd = trace_batch(d.w, -v, [p], c)[0]
    word = [1] + [2] * (len(fwd.grazes) + len(bwd.grazes)) + [1]
    return str(OmegaWord(tuple(word)))
