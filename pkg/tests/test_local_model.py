import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from traverse_lab.errors import NotInDomain
from traverse_lab.local_model import (FIXED, Divisor, DivisorPoint, LocalModel, max_chain_arrows, phi,
                                      pl_interpolator, polarity)
from traverse_lab.pipeline import local_fixed_points

A = (-1.0, 0.0, 1.0)


def m121(**kw):
    return LocalModel("121", alphas=A, **kw)


def test_evaluate_examples():
    assert m121().evaluate(0.0, [0.0]) == 0.0
    assert m121().evaluate(2.0, [0.0]) == pytest.approx(12.0)
    assert LocalModel("2", alphas=(0.0,)).evaluate(0.0, [-0.25]) == pytest.approx(-0.25)


def _triples(d):
    return [(round(p.u, 9), p.m, p.polarity) for p in d]


def test_fiber_divisor_examples():
    assert _triples(m121().fiber_divisor([0.0])) == [(-1, 1, "+"), (0, 2, "+"), (1, 1, "-")]
    assert _triples(m121().fiber_divisor([0.1])) == [(-1, 1, "+"), (1, 1, "-")]
    assert _triples(LocalModel("2", alphas=(0.0,)).fiber_divisor([-0.25])) == [(-0.5, 1, "+"), (0.5, 1, "-")]


def test_components_examples():
    assert np.allclose([c.as_interval() for c in m121().components([0.0])], [(-1, 1)])
    got = [c.as_interval() for c in m121().components([-0.04])]
    assert np.allclose(got, [(-1, -0.2), (0.2, 1)])
    (c,) = LocalModel("2", alphas=(0.0,)).components([0.0])
    assert c.is_singleton and c.as_interval() == (0.0, 0.0)


def test_model_causality_examples():
    m = m121()
    assert m.model_causality([0.0], -1.0) == pytest.approx(0.0)
    assert m.model_causality([0.0], 0.0) == pytest.approx(1.0)
    assert m.model_causality([-0.04], -1.0) == pytest.approx(-0.2)
    assert m.model_causality([-0.04], 0.2) == pytest.approx(1.0)
    assert LocalModel("2", alphas=(0.0,)).model_causality([0.0], 0.0) == FIXED


def test_model_causality_errors():
    with pytest.raises(NotInDomain):
        m121().model_causality([0.0], 1.0)
    with pytest.raises(NotInDomain):
        m121().model_causality([0.0], 0.5)


def test_polarity_examples():
    d = m121().fiber_divisor([0.0])
    assert polarity(d, 1) == "+"
    assert polarity([(0.0, 2)], 0) == "-"
    assert polarity([(0.0, 1), (1.0, 1)], 0) == "+"
    assert polarity([(0.0, 1), (1.0, 1)], 1) == "-"


def test_inadmissible_word_rejected():
    with pytest.raises(ValueError):
        LocalModel("12")
    with pytest.raises(ValueError):
        LocalModel("121", alphas=(0.0, 0.0, 1.0))


def test_pl_interpolator_examples():
    ident = pl_interpolator([0, 1], [0, 1])
    assert ident(0.3) == pytest.approx(0.3)
    f = pl_interpolator([0, 1], [0, 2])
    assert f(0.5) == pytest.approx(1.0)
    assert f(-3) == pytest.approx(-3)
    assert f(5) == pytest.approx(6)


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3, unique=True),
       st.lists(st.floats(-5, 5), min_size=3, max_size=3, unique=True),
       st.lists(st.floats(-5, 5), min_size=3, max_size=3, unique=True))
def test_pl_composition(a, b, c):
    a, b, c = sorted(a), sorted(b), sorted(c)
    if min(np.diff(a).min(), np.diff(b).min(), np.diff(c).min()) < 1e-6:
        return
    f, g, h = pl_interpolator(a, b), pl_interpolator(b, c), pl_interpolator(a, c)
    us = np.linspace(-10, 10, 101)
    assert np.all(np.diff(f(us)) > 0)
    assert np.allclose(f.then(g)(np.asarray(a)), h(np.asarray(a)))


def test_phi():
    assert phi(0.5) == pytest.approx(0.5 - 0.5 * math.exp(-2))
    assert phi(0.5) == pytest.approx(0.4323, abs=1e-4)
    assert phi(0.0) == 0.0
    t = np.linspace(0.05, 1, 50)
    assert np.all((phi(t) > 0) & (phi(t) < t))


def test_separating_coordinates():
    m = m121(eps=0.1)
    rows = m.separating_coordinates([-0.05], np.linspace(0.1, 1, 10))
    for _, comps in rows:
        assert len(comps) == 2
        assert not np.allclose(comps[0][2], comps[1][2])
    single = LocalModel("11", alphas=(0.0, 1.0))
    for _, comps in single.separating_coordinates(np.zeros(0), [0.5]):
        assert len(comps) == 1


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_chain_length_law(m):
    top, per = max_chain_arrows(m, 1000, seed=0)
    assert top == m // 2
    assert all(k <= m // 2 for k in per.values())


@pytest.mark.parametrize("w", ["2", "121", "1221", "141"])
def test_fixed_exactly_at_isolated_even_roots(w):
    res = local_fixed_points(LocalModel(w), 100, seed=3)
    assert res["mismatch_count"] == 0


def test_coefficients_from_roots_round_trip():
    m = LocalModel("4", alphas=(0.0,))
    x = m.coefficients_from_roots([[-0.3, -0.1, 0.1, 0.3]])
    assert sorted(p.u for p in m.fiber_divisor(x)) == pytest.approx([-0.3, -0.1, 0.1, 0.3])
    assert m.chain_lengths(x) == [1, 1]
    # a (121) perturbation realizes the longest chain
    x = m.coefficients_from_roots([[-0.3, 0.0, 0.0, 0.3]])
    assert str(m.fiber_divisor(x).word) == "121"
    assert m.chain_lengths(x) == [2]


@settings(max_examples=50, deadline=None)
@given(st.floats(-0.09, 0.09))
def test_121_fiber_words(x):
    d = m121().fiber_divisor([x])
    assert str(d.word) in ("11", "121", "1111") or (abs(x) < 1e-6)
    assert Divisor(tuple(DivisorPoint(p.u, p.m) for p in d)).total_multiplicity() in (2, 4)
