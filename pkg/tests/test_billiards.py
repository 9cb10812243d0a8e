import math

import numpy as np
import pytest

from traverse_lab.billiards import (BilliardTable, Circle, Ellipse, find_confocal_closure,
                                    incidence_angle, orbit, poncelet_check, scatter, shell, tau,
                                    tangency_census, superellipse_table, two_obstacle_shell)


@pytest.fixture(scope="module")
def sh():
    return shell(2.0, 1.0)


def test_tau_is_an_involution(sh):
    rng = np.random.default_rng(3)
    for s, a in zip(rng.uniform(0, sh.outer.length, 1000), rng.uniform(-1.5, 1.5, 1000)):
        st = sh.state(0, s, a)
        back = tau(tau(st))
        assert np.allclose(back.u, st.u, atol=1e-15)
        assert tau(st).normal_component == pytest.approx(-st.normal_component, abs=1e-15)


def test_tau_fixes_tangent_states(sh):
    st = sh.state(0, 0.7, math.pi / 2)
    assert st.classify(1e-12) == "tangent"
    assert np.allclose(tau(st).u, st.u, atol=1e-15)


def test_shell_tangent_chord(sh):
    st = sh.state_from(0, (-math.sqrt(3), 1.0), (1, 0))
    out, div = scatter(sh, st)
    assert str(div.omega) == "121" and div.m == 4 and div.m_reduced == 1
    assert div.points[1] == pytest.approx((0.0, 1.0), abs=1e-12)
    assert out.xy == pytest.approx((math.sqrt(3), 1.0), abs=1e-12)


def test_shell_miss_and_hit(sh):
    y = 1.5
    _, div = scatter(sh, sh.state_from(0, (-math.sqrt(4 - y * y), y), (1, 0)))
    assert str(div.omega) == "11"
    out, div = scatter(sh, sh.state_from(0, (-math.sqrt(3.75), 0.5), (1, 0)))
    assert str(div.omega) == "11" and out.curve == 1
    assert out.xy == pytest.approx((-math.sqrt(0.75), 0.5), abs=1e-12)


def test_circle_billiard_angle_and_arc():
    t = BilliardTable(Circle(0, 0, 1.0))
    a = 0.4
    states = orbit(t, t.state(0, 0.0, a), 50)
    for s0, s1 in zip(states, states[1:]):
        assert incidence_angle(s1) == pytest.approx(a, abs=1e-10)
        d = (math.atan2(s1.xy[1], s1.xy[0]) - math.atan2(s0.xy[1], s0.xy[0])) % (2 * math.pi)
        assert d == pytest.approx((2 * a - math.pi) % (2 * math.pi), abs=1e-10)


def test_superellipse_orbit_stays_valid():
    t = superellipse_table(4)
    states = orbit(t, t.state(0, 0.1, 0.3), 1000)
    assert all(s.classify() == "inward" for s in states)
    assert max(abs(math.hypot(*s.u) - 1) for s in states) <= 1e-9
    assert max(abs(s.xy[0] ** 4 + s.xy[1] ** 4 - 1) for s in states) <= 1e-8


@pytest.mark.parametrize("k", [3, 4])
def test_poncelet_circles(k):
    R = 2.0
    outer, inner = Circle(0, 0, R), Circle(0, 0, R * math.cos(math.pi / k))
    starts = [outer.point(s) for s in np.linspace(0, outer.length, 10, endpoint=False) + 0.1]
    assert max(poncelet_check(outer, inner, k, starts)) <= 1e-9
    assert min(poncelet_check(outer, inner, k + 1, starts)) >= 0.1


def test_confocal_ellipse_closure():
    outer = Ellipse(0, 0, 2.0, 1.0)
    inner = find_confocal_closure(outer, 3)
    assert inner.a ** 2 - inner.b ** 2 == pytest.approx(3.0, rel=1e-9)
    starts = [(2 * math.cos(p), math.sin(p)) for p in np.linspace(0.05, 2 * math.pi, 10, endpoint=False)]
    assert max(poncelet_check(outer, inner, 3, starts)) <= 1e-6


def test_census_bounds():
    assert tangency_census(shell(), 20000, seed=1)["max_m_reduced"] == 1
    two = tangency_census(two_obstacle_shell(), 20000, seed=1)
    assert two["max_m_reduced"] == 2 and two["max_m"] == 6 and two["violations"] == 0
    plain = tangency_census(BilliardTable(Ellipse(0, 0, 2.0, 1.0)), 5000, seed=1)
    assert plain["max_m"] == 2 and plain["max_m_reduced"] == 0


def test_obstacle_validation():
    with pytest.raises(ValueError):
        BilliardTable(Circle(0, 0, 1.0), [Circle(0.9, 0, 0.5)])
    with pytest.raises(ValueError):
        BilliardTable(Circle(0, 0, 3.0), [Circle(0, 0, 1.0), Circle(0.5, 0, 1.0)])
