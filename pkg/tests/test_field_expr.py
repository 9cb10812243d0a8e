import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from traverse_lab.acceptance import flow_derivatives, jet_vs_fd, random_expression
from traverse_lab.errors import DomainError, ParseError
from traverse_lab.field_expr import (MAX_JET_ORDER, BinOp, Call, Jet, VectorField, evaluate, gradient,
                                     lie_derivative, lie_jet, lie_jet_batch, lint_division, parse)


def test_parse_trees():
    e = parse("1 - x^2 - y^2")
    assert isinstance(e, BinOp) and e.op == "-"
    e = parse("sin(x)*y")
    assert isinstance(e, BinOp) and e.op == "*" and isinstance(e.left, Call)


def test_syntax_error_offset():
    with pytest.raises(ParseError) as err:
        parse("x +")
    assert err.value.offset == 3


@pytest.mark.parametrize("src", ["x ^ y", "foo(x)", "x $ 2", "(x", "2^3^2", "x^-1", ""])
def test_rejects(src):
    with pytest.raises(ParseError):
        parse(src)


@pytest.mark.parametrize("src, p, val", [
    ("1 - x^2 - y^2", (0, 0), 1.0),
    ("1 - x^2 - y^2", (0, 1), 0.0),
    ("exp(x)", (1, 0), math.e),
    ("-x^2", (3, 0), -9.0),
    ("2*x/4 + -y", (2, 1), 0.0),
    ("sqrt(x)*log(y)", (4, math.e), 2.0),
    ("cos(0) + .5e1", (0, 0), 6.0),
])
def test_evaluate(src, p, val):
    assert evaluate(src, p) == pytest.approx(val, abs=1e-15)


@pytest.mark.parametrize("src, p", [("1/x", (0, 1)), ("sqrt(x)", (-1, 0)), ("log(y)", (0, 0))])
def test_domain_errors(src, p):
    with pytest.raises(DomainError):
        evaluate(src, p)


def test_lie_jet_examples():
    assert lie_jet("1 - x^2 - y^2", ("1", "0"), (0, 1), 2) == pytest.approx((0, 0, -2))
    assert lie_jet("1 - x^2 - y^2", ("1", "0"), (-0.6, 0.8), 1) == pytest.approx((0, 1.2), abs=1e-15)
    assert lie_jet("y", ("0", "1"), (0.3, -0.7), 3) == pytest.approx((-0.7, 1, 0, 0))


def test_lie_jet_order_limit():
    with pytest.raises(ValueError):
        lie_jet("x", ("1", "0"), (0, 0), MAX_JET_ORDER + 1)


def test_rotation_field_jets():
    # w = x along the rotation (-y, x): x(t) = cos t at (1, 0)
    assert lie_jet("x", ("-y", "x"), (1, 0), 4) == pytest.approx((1, 0, -1, 0, 1), abs=1e-14)


def test_batch_matches_scalar():
    w = parse("sin(x*y) + x^3")
    v = VectorField("1 + 0.2*y", "cos(x)")
    xs = np.linspace(-1, 1, 7)
    ys = np.linspace(0.5, -0.5, 7)
    batch = lie_jet_batch(w, v, xs, ys, 3)
    for i in range(7):
        assert np.allclose([b[i] for b in batch], lie_jet(w, v, (xs[i], ys[i]), 3), rtol=1e-13)
    assert np.allclose(lie_derivative(w, v, xs, ys), batch[1])


def test_gradient_vs_central_difference():
    w = parse("exp(0.3*x)*sin(y) + x*y^2")
    x, y = 0.4, -0.3
    gx, gy = gradient(w, np.array([x]), np.array([y]))
    h = 1e-6
    assert gx[0] == pytest.approx((w(x + h, y) - w(x - h, y)) / (2 * h), rel=1e-8)
    assert gy[0] == pytest.approx((w(x, y + h) - w(x, y - h)) / (2 * h), rel=1e-8)


def test_jet_division_and_functions():
    t = Jet([0.5, 1.0, 0.0, 0.0])
    r = (1 / (1 + t)).derivatives()
    assert r == pytest.approx([1 / 1.5, -1 / 1.5 ** 2, 2 / 1.5 ** 3, -6 / 1.5 ** 4])
    s = t.c[0]
    assert parse("sqrt(x)")(t, 0).derivatives()[2] == pytest.approx(-0.25 * s ** -1.5)


def test_vector_field_from_strings():
    v = VectorField("1", "0.3*sin(x)")
    assert v(0.0, 0.0) == (1.0, 0.0)
    assert (-v)(1.0, 0.0)[1] == pytest.approx(-0.3 * math.sin(1.0))
    assert str(VectorField("1", "0")).startswith("(")
    assert VectorField("1", "0").is_constant()


def test_lint_division():
    with pytest.warns(UserWarning):
        assert lint_division("1/x", (-1, 1, -1, 1))
    assert lint_division("1/(2 + x)", (-1, 1, -1, 1)) == []


def test_jets_vs_finite_differences_100_cases():
    res = jet_vs_fd(seed=1)
    assert res["max_error"] <= 1e-5, res["worst"]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_random_expression_jets(seed):
    rng = np.random.default_rng(seed)
    src = random_expression(rng)
    p = rng.uniform(-1, 1, 2)
    v = VectorField("1 + 0.3*sin(y)", "0.5*cos(x)")
    jet = np.asarray(lie_jet(src, v, p, 2))
    fd = flow_derivatives(src, v, p, 2)
    assert np.all(np.abs(jet - fd) <= 1e-6 * np.maximum(1, np.abs(fd)))


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_source_round_trip_values(x, y):
    e = parse("x^2 - 3*x*y + sin(y)/(2 + cos(x))")
    assert e(x, y) == pytest.approx(x * x - 3 * x * y + math.sin(y) / (2 + math.cos(x)), rel=1e-12, abs=1e-12)
