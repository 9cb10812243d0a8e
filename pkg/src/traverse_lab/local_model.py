"""Polynomial local models of boundary tangency.

Near a trajectory of type ``omega`` the domain is ``{P(u, x) <= 0}`` with

    P(u, x) = prod_i [ (u - a_i)^{w_i} + sum_{l=0}^{w_i - 2} x_{i,l} (u - a_i)^l ]

and the flow is ``d/du``.  Fixing the coefficient vector ``x`` picks one
line; its real roots form the fiber divisor and the components of
``{P(., x) <= 0}`` are the trajectory pieces.  The coefficient vector is
laid out lexicographically: by factor, then by increasing power ``l``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import IllConditioned, NotInDomain
from .omega import OmegaWord, as_word

FIXED = "FIXED"


def root_tolerance(alpha: float) -> float:
    return 1e-7 * (1.0 + abs(alpha))


def phi(t):
    """Contraction profile: 0 < phi(t) < t on (0, 1], flat difference at 0."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        out = np.where(t > 0, t - t * np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class DivisorPoint:
    u: float
    m: int
    polarity: str = "+"

    def as_dict(self):
        return {"u": self.u, "m": self.m, "polarity": self.polarity}


@dataclass(frozen=True)
class Divisor:
    points: tuple[DivisorPoint, ...]

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def __getitem__(self, k):
        return self.points[k]

    @property
    def positions(self) -> list[float]:
        return [p.u for p in self.points]

    @property
    def word(self) -> OmegaWord:
        return OmegaWord(tuple(p.m for p in self.points))

    def total_multiplicity(self) -> int:
        return sum(p.m for p in self.points)

    def reduced_multiplicity(self) -> int:
        return sum(p.m - 1 for p in self.points)

    def as_records(self):
        return [p.as_dict() for p in self.points]


@dataclass(frozen=True)
class Component:
    lo: float
    hi: float
    points: tuple[int, ...]  # indices into the divisor

    @property
    def is_singleton(self) -> bool:
        return self.lo == self.hi

    def as_interval(self) -> tuple[float, float]:
        return (self.lo, self.hi)


class LocalModel:
    """The model ``Z_omega`` for one multiplicity word.

    ``strict=False`` admits non-admissible words such as ``(3,)``, used to
    study the neighbourhood of a single odd-multiplicity point; components
    may then be unbounded.
    """

    def __init__(self, omega, alphas: Sequence[float] | None = None, eps: float = 0.1,
                 r: float = 1.0, strict: bool = True):
        from .omega import is_admissible

        self.omega = as_word(omega)
        if strict and not is_admissible(self.omega):
            raise ValueError(f"word {self.omega} is not admissible")
        if alphas is None:
            alphas = [float(i) for i in range(len(self.omega))]
        self.alphas = tuple(float(a) for a in alphas)
        if len(self.alphas) != len(self.omega):
            raise ValueError("one root center per word entry")
        if any(b <= a for a, b in zip(self.alphas, self.alphas[1:])):
            raise ValueError("root centers must be strictly increasing")
        self.eps = float(eps)
        self.r = float(r)
        self._offsets = []
        k = 0
        for m in self.omega:
            self._offsets.append(k)
            k += m - 1
        self.dim = k

    def __repr__(self):
        return f"LocalModel({str(self.omega)!r}, alphas={self.alphas}, eps={self.eps})"

    # -- coefficient layout ------------------------------------------------
    def coefficients(self, x) -> list[np.ndarray]:
        """Per-factor coefficient vectors ``x_{i,0..w_i-2}``."""
        x = np.zeros(self.dim) if x is None else np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.dim,):
            raise ValueError(f"coefficient vector must have length {self.dim}")
        return [x[o:o + m - 1] for o, m in zip(self._offsets, self.omega)]

    def factor_poly(self, i: int, x) -> np.ndarray:
        """Coefficients, highest power first, of factor i in ``t = u - a_i``."""
        m = self.omega[i]
        c = np.zeros(m + 1)
        c[0] = 1.0
        xi = self.coefficients(x)[i]
        for l, val in enumerate(xi):
            c[m - l] = val
        return c

    def in_box(self, x) -> bool:
        return float(np.linalg.norm(np.atleast_1d(x))) <= self.eps * (1 + 1e-12) if self.dim else True

    # -- evaluation --------------------------------------------------------
    def evaluate(self, u, x) -> float:
        u = np.asarray(u, dtype=float)
        out = np.ones_like(u)
        for i, a in enumerate(self.alphas):
            out = out * np.polyval(self.factor_poly(i, x), u - a)
        return out if out.ndim else float(out)

    def factor_roots(self, i: int, x) -> list[tuple[float, int]]:
        return _real_roots_with_multiplicity(self.factor_poly(i, x), self.alphas[i])

    def fiber_divisor(self, x) -> Divisor:
        pts: list[tuple[float, int]] = []
        for i in range(len(self.omega)):
            pts.extend(self.factor_roots(i, x))
        pts.sort()
        for (u0, _), (u1, _) in zip(pts, pts[1:]):
            tau = root_tolerance(u0)
            if u1 - u0 <= tau:
                raise IllConditioned(f"roots of different factors collide at u={u0:.3g}")
        provisional = Divisor(tuple(DivisorPoint(u, m) for u, m in pts))
        pols = polarities(provisional, self._leading_sign_minus_inf())
        return Divisor(tuple(DivisorPoint(p.u, p.m, s) for p, s in zip(provisional, pols)))

    def _leading_sign_minus_inf(self) -> int:
        return -1 if sum(self.omega) % 2 else 1

    def components(self, x) -> list[Component]:
        d = self.fiber_divisor(x)
        return divisor_components(d, self._leading_sign_minus_inf())

    def model_causality(self, x, u_k: float, tol: float | None = None):
        """Next divisor point after ``u_k`` in its component, or ``FIXED``."""
        d = self.fiber_divisor(x)
        k = _locate(d, u_k, tol)
        comps = divisor_components(d, self._leading_sign_minus_inf())
        for comp in comps:
            if k in comp.points:
                if comp.is_singleton:
                    return FIXED
                j = comp.points.index(k)
                if j == len(comp.points) - 1:
                    raise NotInDomain(f"u={u_k} is the exit end of its component")
                return d[comp.points[j + 1]].u
        raise NotInDomain(f"u={u_k} lies in no component")  # pragma: no cover

    def chain_lengths(self, x) -> list[int]:
        """Arrow counts of every causality chain over ``x``."""
        d = self.fiber_divisor(x)
        comps = divisor_components(d, self._leading_sign_minus_inf())
        return [len(c.points) - 1 for c in comps]

    def fixed_points(self, x) -> list[float]:
        d = self.fiber_divisor(x)
        comps = divisor_components(d, self._leading_sign_minus_inf())
        return [d[c.points[0]].u for c in comps if c.is_singleton]

    # -- sampling ----------------------------------------------------------
    def random_coefficients(self, rng: np.random.Generator, radius: float | None = None) -> np.ndarray:
        radius = self.eps if radius is None else radius
        v = rng.normal(size=self.dim)
        n = np.linalg.norm(v)
        if n == 0:
            return v
        return v / n * radius * rng.uniform() ** (1.0 / self.dim)

    def coefficients_from_roots(self, factor_roots: Sequence[Sequence[complex]]) -> np.ndarray:
        """Coefficient vector whose factors have the given (depressed) roots.

        Each factor's roots are shifted to sum to zero, so the result always
        lies in the model family.
        """
        x = []
        for i, roots in enumerate(factor_roots):
            m = self.omega[i]
            roots = np.asarray(roots, dtype=complex)
            if len(roots) != m:
                raise ValueError(f"factor {i} needs {m} roots")
            roots = roots - roots.mean()
            c = np.real(np.poly(roots))
            # c[0] = 1, c[1] = 0; x_{i,l} is the coefficient of t^l
            x.extend(c[m - l] for l in range(m - 1))
        return np.asarray(x, dtype=float)

    def separating_coordinates(self, x_star, ts: Iterable[float]):
        """Second coordinate separating components over the radial arc ``t * x_star``.

        Component ``k`` (0-based, ordered along u) over ``t * x_star`` receives
        ``phi^k(t) * x_star``.  Returns, per t, a list of
        ``(interval, x, x_tilde)`` triples.
        """
        x_star = np.atleast_1d(np.asarray(x_star, dtype=float))
        out = []
        for t in ts:
            x = t * x_star
            comps = self.components(x)
            rows = []
            s = float(t)
            for comp in comps:
                rows.append((comp.as_interval(), x.copy(), s * x_star))
                s = phi(s)
            out.append((float(t), rows))
        return out


# ------------------------------------------------------------- root finding

def _real_roots_with_multiplicity(coeffs: np.ndarray, center: float) -> list[tuple[float, int]]:
    """Real roots of a monic polynomial in ``t = u - center``, returned in u."""
    deg = len(coeffs) - 1
    if deg == 0:
        return []
    tau = root_tolerance(center)
    roots = np.roots(coeffs) if np.any(coeffs[1:]) else np.zeros(deg, dtype=complex)
    clusters = _cluster(roots, tau)
    out = []
    for members in clusters:
        z = np.mean(members)
        if abs(z.imag) > tau:
            continue
        k = len(members)
        t = _polish(coeffs, z.real, k)
        out.append((center + t, k))
    out.sort()
    for (a, _), (b, _) in zip(out, out[1:]):
        if tau < b - a < 2 * tau:
            raise IllConditioned(f"roots {a:.12g} and {b:.12g} straddle the clustering threshold")
    return out


def _cluster(roots: np.ndarray, tau: float) -> list[list[complex]]:
    # single linkage on the complex plane
    remaining = list(roots)
    clusters = []
    while remaining:
        group = [remaining.pop()]
        grew = True
        while grew:
            grew = False
            for z in list(remaining):
                if min(abs(z - g) for g in group) <= tau:
                    group.append(z)
                    remaining.remove(z)
                    grew = True
        clusters.append(group)
    return clusters


def _polish(coeffs: np.ndarray, t0: float, k: int, iters: int = 8) -> float:
    # a root of multiplicity k is a simple root of the (k-1)-th derivative
    p = np.polyder(coeffs, k - 1) if k > 1 else coeffs
    dp = np.polyder(p)
    t = t0
    for _ in range(iters):
        d = np.polyval(dp, t)
        if d == 0:
            break
        step = np.polyval(p, t) / d
        if not math.isfinite(step) or abs(step) > 1e-3 * (1 + abs(t)):
            break
        t -= step
        if abs(step) <= 1e-16 * (1 + abs(t)):
            break
    return float(t)


# ------------------------------------------------------ atoms and polarity

def _gap_signs(d: Divisor, sign_minus_inf: int) -> list[int]:
    """Sign of P on each of the len(d)+1 open gaps between divisor points."""
    signs = [sign_minus_inf]
    s = sign_minus_inf
    for p in d:
        if p.m % 2:
            s = -s
        signs.append(s)
    return signs


def divisor_components(d: Divisor, sign_minus_inf: int = 1) -> list[Component]:
    """Maximal intervals of ``{P <= 0}``; isolated even roots become singletons."""
    signs = _gap_signs(d, sign_minus_inf)
    comps: list[Component] = []
    current: list[int] | None = None
    lo = -math.inf if signs[0] < 0 else None
    if signs[0] < 0:
        current = []
    for k, p in enumerate(d):
        left, right = signs[k], signs[k + 1]
        if current is None:
            current = [k]
            lo = p.u
        else:
            current.append(k)
        if right > 0:
            comps.append(Component(lo, p.u, tuple(current)))
            current = None
    if current is not None:
        comps.append(Component(lo, math.inf, tuple(current)))
    return comps


def polarities(d: Divisor, sign_minus_inf: int = 1) -> list[str]:
    """Polarity of each divisor point from its place in the atom/string decomposition."""
    out = ["+"] * len(d)
    for comp in divisor_components(d, sign_minus_inf):
        if comp.is_singleton:
            for k in comp.points:
                out[k] = "-" if d[k].m % 2 == 0 else "+"
            continue
        for j, k in enumerate(comp.points):
            if d[k].m % 2 == 0:
                out[k] = "+"
            elif j == 0 and comp.lo == d[k].u:
                out[k] = "+"
            else:
                out[k] = "-"
    return out


def polarity(d: Divisor | Sequence, k: int) -> str:
    """Polarity of the k-th point of a divisor given as points or ``(u, m)`` pairs."""
    if not isinstance(d, Divisor):
        d = Divisor(tuple(p if isinstance(p, DivisorPoint) else DivisorPoint(float(p[0]), int(p[1]))
                          for p in d))
    sign = -1 if d.total_multiplicity() % 2 else 1
    return polarities(d, sign)[k]


def _locate(d: Divisor, u: float, tol: float | None) -> int:
    if not len(d):
        raise NotInDomain("empty fiber")
    pos = np.asarray(d.positions)
    k = int(np.argmin(np.abs(pos - u)))
    tol = root_tolerance(u) * 10 if tol is None else tol
    if abs(pos[k] - u) > tol:
        raise NotInDomain(f"u={u} is not a divisor point")
    return k


# ------------------------------------------------------------ PL matching

class PLMap:
    """Increasing piecewise-linear map sending knots ``src[k]`` to ``dst[k]``.

    Slope 1 to the left of the first and right of the last knot.
    """

    def __init__(self, src: Sequence[float], dst: Sequence[float]):
        src = np.asarray(src, dtype=float)
        dst = np.asarray(dst, dtype=float)
        if src.shape != dst.shape:
            raise ValueError("divisors must have the same size")
        if src.size == 0:
            raise ValueError("divisors must be nonempty")
        if np.any(np.diff(src) <= 0) or np.any(np.diff(dst) <= 0):
            raise ValueError("divisor positions must be strictly increasing")
        self.src = src
        self.dst = dst

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        out = np.interp(u, self.src, self.dst)
        out = np.where(u < self.src[0], self.dst[0] + (u - self.src[0]), out)
        out = np.where(u > self.src[-1], self.dst[-1] + (u - self.src[-1]), out)
        return out if out.ndim else float(out)

    def then(self, other: "PLMap") -> "PLMap":
        return PLMap(self.src, other(self.dst))


def pl_interpolator(d1: Sequence[float], d2: Sequence[float]) -> PLMap:
    return PLMap(d1, d2)


# ----------------------------------------------- sampling for chain studies

def random_root_pattern(m: int, rng: np.random.Generator, scale: float) -> list[complex]:
    """Roots of a random degree-m polynomial drawn across all real root patterns.

    Mixes simple real roots, real double roots and complex pairs so that the
    lower-dimensional strata (double roots) are hit with positive probability.
    """
    parts = []
    rem = m
    while rem > 0:
        choices = ["s"] + (["d", "c"] if rem >= 2 else [])
        kind = choices[rng.integers(len(choices))]
        parts.append(kind)
        rem -= 1 if kind == "s" else 2
    n_real = sum(1 for p in parts if p != "c")
    centers = np.sort(rng.uniform(-scale, scale, size=n_real))
    roots: list[complex] = []
    real_parts = [p for p in parts if p != "c"]
    rng.shuffle(real_parts)
    for c, kind in zip(centers, real_parts):
        roots.extend([c] * (2 if kind == "d" else 1))
    for kind in parts:
        if kind == "c":
            re_ = rng.uniform(-scale, scale)
            im = rng.uniform(0.05, 1.0) * scale
            roots.extend([complex(re_, im), complex(re_, -im)])
    return roots


def max_chain_arrows(m: int, samples: int = 1000, radii=(0.5, 0.1, 0.02),
                     seed: int = 0) -> tuple[int, dict]:
    """Longest localized causality chain near a multiplicity-m point.

    Samples coefficient vectors of ``u^m + sum_{l<=m-2} x_l u^l`` in shrinking
    boxes: half uniformly, half through random root patterns pushed through
    the Vieta map.  Returns the overall maximum and per-radius maxima.
    """
    rng = np.random.default_rng(seed)
    model = LocalModel((m,), alphas=(0.0,), eps=max(radii), strict=False)
    per_radius = {}
    per = max(1, -(-samples // len(radii)))
    for radius in radii:
        # roots in [-s, s] give |x_l| <= 2^m s^(m-l) <= radius since m - l >= 2
        s = min(1.0, math.sqrt(radius / 2.0 ** m))
        top = 0
        for j in range(per):
            if j % 2 == 0:
                x = rng.uniform(-radius, radius, size=model.dim)
            else:
                x = model.coefficients_from_roots([random_root_pattern(m, rng, s)])
            try:
                top = max(top, max(model.chain_lengths(x), default=0))
            except IllConditioned:
                continue
        per_radius[radius] = top
    return max(per_radius.values()), per_radius
