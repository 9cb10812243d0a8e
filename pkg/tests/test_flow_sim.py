import math

import numpy as np
import pytest

from traverse_lab.errors import Degenerate, MonotonicityViolation, TimeBudgetExceeded
from traverse_lab.field_expr import VectorField
from traverse_lab.flow_sim import (BoundaryPoint, Domain2D, check_traversing, classify_boundary_point,
                                   embed_alpha, is_generic_word, strata, trace_many, trace_trajectory)
from traverse_lab.omega import OmegaWord

R3 = math.sqrt(3)


def _xy(p):
    return np.asarray(p.xy)


def test_boundary_lengths(disk, annulus):
    assert disk[0].components[0].length == pytest.approx(2 * math.pi, abs=1e-9)
    lengths = sorted(c.length for c in annulus[0].components)
    assert lengths == pytest.approx([2 * math.pi, 4 * math.pi], abs=1e-9)


def test_boundary_points_on_zero_set(annulus):
    d = annulus[0]
    for c in d.components:
        s = np.linspace(0, c.length, 97)
        pts = c.point(s)
        assert np.max(np.abs(d.w(pts[:, 0], pts[:, 1]))) < 1e-10


def test_locate_round_trip(disk):
    d = disk[0]
    for s in np.linspace(0.1, 6.2, 9):
        c, s2 = d.locate(d.point(0, s))
        assert c == 0 and s2 == pytest.approx(s, abs=1e-10)


def test_classify_examples(disk, annulus):
    d, v, _ = disk
    assert classify_boundary_point(d, v, (-0.6, 0.8)) == (1, "+")
    assert classify_boundary_point(d, v, (0.6, 0.8)) == (1, "-")
    assert classify_boundary_point(d, v, (0.0, 1.0)) == (2, "-")
    assert classify_boundary_point(annulus[0], annulus[1], (0.0, 1.0)) == (2, "+")
    with pytest.raises(ValueError):
        classify_boundary_point(d, v, (0.0, 0.5))


def test_disk_chord(disk):
    d, v, _ = disk
    tr = trace_trajectory(d, v, (-0.6, 0.8))
    assert str(tr.omega) == "11"
    assert _xy(tr.exit) == pytest.approx([0.6, 0.8], abs=1e-10)
    assert tr.transit_time == pytest.approx(1.2, abs=1e-9)


def test_disk_singleton_near_top(disk):
    d, v, _ = disk
    p = (1e-9, math.sqrt(1 - 1e-18))
    tr = trace_trajectory(d, v, p)
    assert tr.is_singleton and str(tr.omega) == "2"


def test_annulus_tangent_trajectory(annulus):
    d, v, _ = annulus
    for start in [(-R3, 1.0), (0.0, 1.0)]:
        tr = trace_trajectory(d, v, start)
        assert str(tr.omega) == "121"
        pts = np.array([p.xy for p in tr.divisor])
        assert pts == pytest.approx(np.array([[-R3, 1], [0, 1], [R3, 1]]), abs=1e-7)
        assert [p.m for p in tr.divisor] == [1, 2, 1]


def test_exit_point_is_not_an_entry(disk):
    d, v, _ = disk
    with pytest.raises(ValueError):
        trace_trajectory(d, v, (0.6, 0.8))


def test_disk_strata(disk):
    d, v, st = disk
    assert len(st.arcs_with_sign("+")) == 1 and len(st.arcs_with_sign("-")) == 1
    pts = sorted((round(p.xy[0], 9), round(p.xy[1], 9), p.stratum) for p in st.points)
    assert pts == [(0, -1, (2, "-")), (0, 1, (2, "-"))]
    assert st.euler_characteristic() == 1


def test_annulus_strata(annulus):
    d, v, st = annulus
    assert len(st.arcs_with_sign("+")) == 2 and len(st.arcs_with_sign("-")) == 2
    plus = sorted(round(p.xy[1], 9) for p in st.points_with_sign("+"))
    minus = sorted(round(p.xy[1], 9) for p in st.points_with_sign("-"))
    assert plus == [-1, 1] and minus == [-2, 2]
    assert all(abs(p.xy[0]) < 1e-9 for p in st.points)
    assert st.euler_characteristic() == 0


def test_reversed_field_swaps_arcs(disk, annulus):
    for d, v, st in (disk, annulus):
        back = strata(d, -v)
        assert len(back.arcs_with_sign("+")) == len(st.arcs_with_sign("-"))
        assert len(back.points) == len(st.points)
        assert back.euler_characteristic() == st.euler_characteristic()
    assert strata(disk[0], -disk[1]).euler_characteristic() == 1


def test_check_traversing(disk, annulus):
    assert check_traversing(disk[0], disk[1], 100).passed
    rep = check_traversing(annulus[0], VectorField("-y", "x"), 20, t_budget=50.0)
    assert not rep.passed and rep.failures
    assert check_traversing(disk[0], VectorField("1", "0.3*sin(x)"), 100).passed


def test_embed_alpha(disk, annulus):
    tr = trace_trajectory(disk[0], disk[1], (-0.6, 0.8))
    (e,) = embed_alpha([tr], "x", disk[1])
    assert e["interval"] == pytest.approx((-0.6, 0.6), abs=1e-10)
    ta = trace_trajectory(annulus[0], annulus[1], (-R3, 1.0))
    (e,) = embed_alpha([ta], "x", annulus[1])
    assert e["interval"] == pytest.approx((-R3, R3), abs=1e-7)
    assert e["marks"][1] == pytest.approx(0.0, abs=1e-7)
    with pytest.raises(MonotonicityViolation):
        embed_alpha([tr], "-x", disk[1])


def test_trace_many_matches_chord_oracle(disk):
    d, v, st = disk
    ys = np.linspace(-0.95, 0.95, 41)
    entries = []
    for y in ys:
        c, s = d.locate((-math.sqrt(1 - y * y), y))
        xy = d.point(c, s)
        entries.append(BoundaryPoint(c, s, (float(xy[0]), float(xy[1])), (1, "+"), 1))
    for e, tr in zip(entries, trace_many(d, v, entries, strict=True)):
        assert tr.exit.xy == pytest.approx((-e.xy[0], e.xy[1]), abs=1e-9)


def test_timeout_and_degeneracy():
    d = Domain2D("1 - x^2 - y^2", (-1.5, 1.5, -1.5, 1.5))
    v = VectorField("-y", "x")
    c, s = d.locate((0.0, -1.0))
    with pytest.raises((TimeBudgetExceeded, Degenerate, ValueError)):
        trace_trajectory(d, v, d.boundary_point(c, s, v))
    with pytest.raises(Degenerate):
        Domain2D("(1 - x^2 - y^2)^3", (-1.5, 1.5, -1.5, 1.5))


def test_no_boundary_is_an_error():
    with pytest.raises(ValueError):
        Domain2D("1 + x^2", (-1, 1, -1, 1))


def test_generic_words():
    assert is_generic_word(OmegaWord((1, 2, 1)))
    assert not is_generic_word(OmegaWord((1, 4, 1)))
