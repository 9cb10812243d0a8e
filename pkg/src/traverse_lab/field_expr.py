"""Expression language for planar scalar and vector fields.

Expressions over ``x`` and ``y`` are parsed by recursive descent, compiled
to plain Python closures (evaluated left to right, so results are
reproducible), and can be evaluated on floats, numpy arrays, or truncated
Taylor jets.  The jets give exact iterated directional derivatives along the
flow of a vector field.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, ParseError

MAX_JET_ORDER = 4
FUNCTIONS = ("sin", "cos", "exp", "sqrt", "log")


# --------------------------------------------------------------------- trees

class Expr:
    _compiled = None

    def source(self) -> str:
        raise NotImplementedError

    def compile(self) -> Callable:
        if self._compiled is None:
            code = f"lambda x, y: {self.source()}"
            fn = eval(code, dict(_NAMESPACE))  # noqa: S307 - generated from our own tree
            object.__setattr__(self, "_compiled", fn)
        return self._compiled

    def __call__(self, x, y):
        return self.compile()(x, y)

    def variables(self) -> set[str]:
        out: set[str] = set()
        for node in self.walk():
            if isinstance(node, Var):
                out.add(node.name)
        return out

    def walk(self):
        yield self


@dataclass(frozen=True)
class Num(Expr):
    value: float

    def source(self):
        return repr(float(self.value))


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def source(self):
        return self.name


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def source(self):
        return f"(-{self.arg.source()})"

    def walk(self):
        yield self
        yield from self.arg.walk()


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def source(self):
        if self.op == "/":
            return f"_div({self.left.source()}, {self.right.source()})"
        return f"({self.left.source()} {self.op} {self.right.source()})"

    def walk(self):
        yield self
        yield from self.left.walk()
        yield from self.right.walk()


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def source(self):
        return f"_ipow({self.base.source()}, {self.exponent})"

    def walk(self):
        yield self
        yield from self.base.walk()


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr

    def source(self):
        return f"_{self.func}({self.arg.source()})"

    def walk(self):
        yield self
        yield from self.arg.walk()


# -------------------------------------------------------------------- parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(source: str):
    pos = 0
    tokens = []
    n = len(source)
    while pos < n:
        if source[pos:].strip() == "":
            break
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {source[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, off = self.take()
        if text != value or kind != "op":
            raise ParseError(f"expected {value!r}", off)

    def parse(self) -> Expr:
        e = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {text!r}", off)
        return e

    def expr(self):
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            left = BinOp(op, left, self.term())
        return left

    def term(self):
        left = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            left = BinOp(op, left, self.factor())
        return left

    def factor(self):
        kind, text, off = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return Neg(self.factor())
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            kind, text, off = self.take()
            if kind != "num" or not text.isdigit():
                raise ParseError("exponent must be a nonnegative integer literal", off)
            return Pow(base, int(text))
        return base

    def atom(self):
        kind, text, off = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in ("x", "y"):
                return Var(text)
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            raise ParseError(f"unknown identifier {text!r}", off)
        if kind == "op" and text == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if kind == "op" and text == "-":
            return Neg(self.atom())
        if kind == "end":
            raise ParseError("unexpected end of input", off)
        raise ParseError(f"unexpected token {text!r}", off)


def parse(source: str) -> Expr:
    return _Parser(source).parse()


def as_expr(e) -> Expr:
    if isinstance(e, Expr):
        return e
    if isinstance(e, (int, float)):
        return Num(float(e))
    return parse(str(e))


# ---------------------------------------------------------------------- jets

class Jet:
    """Truncated Taylor series ``c[0] + c[1] t + ... + c[K] t^K``.

    Coefficients may be floats or equally shaped numpy arrays, so one jet can
    carry a whole batch of points.
    """

    __slots__ = ("c",)
    __array_ufunc__ = None

    def __init__(self, coeffs):
        self.c = list(coeffs)

    @property
    def order(self):
        return len(self.c) - 1

    @classmethod
    def constant(cls, value, order):
        return cls([value] + [0.0] * order)

    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.order)

    def __add__(self, other):
        o = self._lift(other)
        return Jet([a + b for a, b in zip(self.c, o.c)])

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        return Jet([a - b for a, b in zip(self.c, o.c)])

    def __rsub__(self, other):
        return self._lift(other) - self

    def __neg__(self):
        return Jet([-a for a in self.c])

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet([a * other for a in self.c])
        a, b = self.c, other.c
        return Jet([sum(a[i] * b[k - i] for i in range(k + 1)) for k in range(len(a))])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return _div(self, other)
        return _div(self, other)

    def __rtruediv__(self, other):
        return _div(self._lift(other), self)

    def __pow__(self, n):
        return _ipow(self, n)

    def derivatives(self):
        """Return ``[f, f', f'', ...]`` (coefficients times factorials)."""
        return [c * math.factorial(k) for k, c in enumerate(self.c)]


def _check_nonzero(b0):
    if np.any(np.asarray(b0) == 0):
        raise DomainError("division by zero")


def _div(a, b):
    if isinstance(b, Jet):
        a = b._lift(a)
        _check_nonzero(b.c[0])
        q = []
        for k in range(len(a.c)):
            acc = a.c[k]
            for i in range(1, k + 1):
                acc = acc - b.c[i] * q[k - i]
            q.append(acc / b.c[0])
        return Jet(q)
    _check_nonzero(b)
    if isinstance(a, Jet):
        return Jet([c / b for c in a.c])
    return a / b


def _ipow(a, n):
    if n == 0:
        return a._lift(1.0) if isinstance(a, Jet) else a * 0 + 1.0
    if not isinstance(a, Jet):
        return a ** n
    result = None
    base = a
    while n:
        if n & 1:
            result = base if result is None else result * base
        n >>= 1
        if n:
            base = base * base
    return result


def _exp(a):
    if not isinstance(a, Jet):
        return np.exp(a)
    e = [np.exp(a.c[0])]
    for k in range(1, len(a.c)):
        e.append(sum(j * a.c[j] * e[k - j] for j in range(1, k + 1)) / k)
    return Jet(e)


def _log(a):
    a0 = a.c[0] if isinstance(a, Jet) else a
    if np.any(np.asarray(a0) <= 0):
        raise DomainError("log of a nonpositive number")
    if not isinstance(a, Jet):
        return np.log(a)
    lg = [np.log(a0)]
    for k in range(1, len(a.c)):
        acc = a.c[k]
        for j in range(1, k):
            acc = acc - j * lg[j] * a.c[k - j] / k
        lg.append(acc / a0)
    return Jet(lg)


def _sqrt(a):
    a0 = a.c[0] if isinstance(a, Jet) else a
    if np.any(np.asarray(a0) < 0):
        raise DomainError("sqrt of a negative number")
    if not isinstance(a, Jet):
        return np.sqrt(a)
    if a.order > 0 and np.any(np.asarray(a0) == 0):
        raise DomainError("sqrt is not differentiable at 0")
    s = [np.sqrt(a0)]
    for k in range(1, len(a.c)):
        acc = a.c[k]
        for j in range(1, k):
            acc = acc - s[j] * s[k - j]
        s.append(acc / (2 * s[0]))
    return Jet(s)


def _sincos(a):
    s = [np.sin(a.c[0])]
    c = [np.cos(a.c[0])]
    for k in range(1, len(a.c)):
        s.append(sum(j * a.c[j] * c[k - j] for j in range(1, k + 1)) / k)
        c.append(-sum(j * a.c[j] * s[k - j] for j in range(1, k + 1)) / k)
    return Jet(s), Jet(c)


def _sin(a):
    return _sincos(a)[0] if isinstance(a, Jet) else np.sin(a)


def _cos(a):
    return _sincos(a)[1] if isinstance(a, Jet) else np.cos(a)


_NAMESPACE = {
    "_div": _div,
    "_ipow": _ipow,
    "_exp": _exp,
    "_log": _log,
    "_sqrt": _sqrt,
    "_sin": _sin,
    "_cos": _cos,
}


# --------------------------------------------------------------- evaluation

def evaluate(e, p) -> float:
    """Value of expression ``e`` at the point ``p = (x, y)``."""
    e = as_expr(e)
    with np.errstate(all="raise"):
        try:
            return float(e(float(p[0]), float(p[1])))
        except FloatingPointError as exc:
            raise DomainError(str(exc)) from exc


@dataclass(frozen=True)
class VectorField:
    vx: Expr
    vy: Expr

    def __post_init__(self):
        object.__setattr__(self, "vx", as_expr(self.vx))
        object.__setattr__(self, "vy", as_expr(self.vy))

    def __str__(self):
        return f"({self.vx.source()}, {self.vy.source()})"

    @classmethod
    def of(cls, components) -> "VectorField":
        if isinstance(components, VectorField):
            return components
        a, b = components
        return cls(as_expr(a), as_expr(b))

    def __call__(self, x, y):
        return self.vx(x, y), self.vy(x, y)

    def __neg__(self) -> "VectorField":
        return VectorField(Neg(self.vx), Neg(self.vy))

    def is_constant(self) -> bool:
        return not (self.vx.variables() or self.vy.variables())


def flow_jets(v: VectorField, x, y, order: int):
    """Taylor jets of the trajectory through (x, y), exact to ``order``."""
    X = Jet.constant(x, order)
    Y = Jet.constant(y, order)
    for _ in range(order):
        VX = v.vx(X, Y)
        VY = v.vy(X, Y)
        VX = VX if isinstance(VX, Jet) else Jet.constant(VX, order)
        VY = VY if isinstance(VY, Jet) else Jet.constant(VY, order)
        # Picard step: integrate the series once
        X = Jet([x] + [VX.c[k] / (k + 1) for k in range(order)])
        Y = Jet([y] + [VY.c[k] / (k + 1) for k in range(order)])
    return X, Y


def lie_jet(w, v, p, k: int) -> tuple[float, ...]:
    """``(w, L_v w, ..., L_v^k w)`` at ``p``."""
    if not 0 <= k <= MAX_JET_ORDER:
        raise ValueError(f"jet order must be in [0, {MAX_JET_ORDER}]")
    w = as_expr(w)
    v = VectorField.of(v)
    X, Y = flow_jets(v, float(p[0]), float(p[1]), k)
    W = w(X, Y)
    if not isinstance(W, Jet):
        W = Jet.constant(W, k)
    return tuple(float(d) for d in W.derivatives())


def lie_jet_batch(w: Expr, v: VectorField, xs, ys, k: int) -> list[np.ndarray]:
    """Vectorized ``lie_jet`` over arrays of points; returns k+1 arrays."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    X, Y = flow_jets(v, xs, ys, k)
    W = w(X, Y)
    if not isinstance(W, Jet):
        W = Jet.constant(W, k)
    return [np.broadcast_to(np.asarray(d, dtype=float), xs.shape).copy() for d in W.derivatives()]


def lie_derivative(w: Expr, v: VectorField, xs, ys):
    """First Lie derivative ``L_v w`` on arrays (order-1 jet)."""
    return lie_jet_batch(w, v, xs, ys, 1)[1]


def gradient(w: Expr, xs, ys):
    """Gradient via two order-1 jets along the coordinate directions."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    gx = w(Jet([xs, np.ones_like(xs)]), Jet([ys, np.zeros_like(ys)]))
    gy = w(Jet([xs, np.zeros_like(xs)]), Jet([ys, np.ones_like(ys)]))
    gx = gx.c[1] if isinstance(gx, Jet) else np.zeros_like(xs)
    gy = gy.c[1] if isinstance(gy, Jet) else np.zeros_like(xs)
    return np.broadcast_to(gx, xs.shape).astype(float), np.broadcast_to(gy, xs.shape).astype(float)


def lint_division(e, box: Sequence[float], samples: int = 64) -> list[str]:
    """Warn when a denominator of ``e`` vanishes or changes sign on a sampled box."""
    e = as_expr(e)
    xmin, xmax, ymin, ymax = box
    gx, gy = np.meshgrid(np.linspace(xmin, xmax, samples), np.linspace(ymin, ymax, samples))
    problems = []
    for node in e.walk():
        if isinstance(node, BinOp) and node.op == "/":
            try:
                with np.errstate(all="ignore"):
                    den = np.asarray(node.right(gx, gy), dtype=float)
            except DomainError:
                problems.append(f"denominator {node.right.source()} leaves its domain on the box")
                continue
            den = np.broadcast_to(den, gx.shape)
            if np.any(den == 0) or (np.nanmin(den) < 0 < np.nanmax(den)):
                problems.append(f"denominator {node.right.source()} can vanish on the box")
    for msg in problems:
        warnings.warn(msg, stacklevel=2)
    return problems
