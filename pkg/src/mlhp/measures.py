"""Generating measures on compact intervals and their Gauss discretizations.

A :class:`MeasureSpec` names an absolutely continuous weight on an interval.
:func:`build_quadrature` turns it into a :class:`QuadratureRule` at a given
binary precision; every integral against the measure elsewhere in the
package (moments, Cauchy transforms, nested transforms, orthogonality
integrals) is a finite sum over such a rule.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import gmpy2
import mpmath
import numpy as np
from scipy import special

from . import _mpfr
from .polynomials import to_fraction

__all__ = [
    "Interval",
    "WeightSpec",
    "MeasureSpec",
    "QuadratureRule",
    "NearSupportError",
    "DegradedAccuracyWarning",
    "build_quadrature",
    "moments",
    "cauchy_transform",
    "distance_to_interval",
    "mp_value",
]

WEIGHT_KINDS = ("uniform", "chebyshev", "jacobi", "tabulated")


class NearSupportError(ValueError):
    """A transform was requested too close to the support of its measure."""


class DegradedAccuracyWarning(UserWarning):
    """Requested moments exceed the degree the rule integrates exactly."""


def mp_value(x: Fraction):
    """Fraction -> mpf rounded at the current mpmath precision."""
    return mpmath.mpf(x.numerator) / x.denominator


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[a, b]`` with exact rational endpoints."""

    a: Fraction
    b: Fraction

    def __init__(self, a, b):
        a, b = to_fraction(a), to_fraction(b)
        if not a < b:
            raise ValueError(f"interval endpoints must satisfy a < b, got [{a}, {b}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self) -> Fraction:
        return self.b - self.a

    def endpoints(self):
        return mp_value(self.a), mp_value(self.b)

    def intersects(self, other: "Interval") -> bool:
        return not (self.b < other.a or other.b < self.a)

    def reflected(self) -> "Interval":
        return Interval(-self.b, -self.a)

    def __str__(self):
        return f"[{self.a}, {self.b}]"


def distance_to_interval(z, interval: Interval):
    """Euclidean distance from a real or complex point to the segment."""
    a, b = interval.endpoints()
    z = mpmath.mpmathify(z)
    x = mpmath.re(z)
    y = mpmath.im(z)
    if x < a:
        dx = a - x
    elif x > b:
        dx = x - b
    else:
        dx = mpmath.mpf(0)
    return mpmath.sqrt(dx * dx + y * y)


@dataclass(frozen=True)
class WeightSpec:
    """Weight descriptor.

    ``uniform`` and ``chebyshev`` (first kind) need no parameters; ``jacobi``
    means ``(1-t)**alpha * (1+t)**beta`` in the affine variable ``t`` that maps
    the interval onto ``[-1, 1]``; ``tabulated`` carries ``samples`` as
    ``(x, w(x))`` pairs covering the interval, linearly interpolated.
    """

    kind: str
    alpha: Fraction = Fraction(0)
    beta: Fraction = Fraction(0)
    samples: tuple = ()

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise ValueError(f"unsupported weight descriptor {self.kind!r}; "
                             f"expected one of {WEIGHT_KINDS}")
        object.__setattr__(self, "alpha", to_fraction(self.alpha))
        object.__setattr__(self, "beta", to_fraction(self.beta))
        if self.kind == "jacobi" and (self.alpha <= -1 or self.beta <= -1):
            raise ValueError("Jacobi parameters must satisfy alpha, beta > -1")
        if self.kind == "tabulated":
            pts = tuple((to_fraction(x), to_fraction(w)) for x, w in self.samples)
            if len(pts) < 2:
                raise ValueError("tabulated weight needs at least two samples")
            if any(pts[i][0] >= pts[i + 1][0] for i in range(len(pts) - 1)):
                raise ValueError("tabulated sample abscissae must be increasing")
            if any(w <= 0 for _, w in pts):
                raise ValueError("tabulated weight samples must be positive")
            object.__setattr__(self, "samples", pts)


@dataclass(frozen=True)
class MeasureSpec:
    interval: Interval
    weight: WeightSpec
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        w = self.weight
        if w.kind == "tabulated":
            xs = [x for x, _ in w.samples]
            if xs[0] != self.interval.a or xs[-1] != self.interval.b:
                raise ValueError("tabulated samples must start and end at the "
                                 "interval endpoints")

    def reflected(self) -> "MeasureSpec":
        """Image measure under ``x -> -x``."""
        w = self.weight
        if w.kind == "jacobi":
            w = WeightSpec("jacobi", alpha=w.beta, beta=w.alpha)
        elif w.kind == "tabulated":
            w = WeightSpec("tabulated",
                           samples=tuple((-x, y) for x, y in reversed(w.samples)))
        return MeasureSpec(self.interval.reflected(), w, self.sign)

    def to_config(self) -> dict:
        out = {"interval": [str(self.interval.a), str(self.interval.b)],
               "weight": self.weight.kind, "sign": self.sign}
        if self.weight.kind == "jacobi":
            out["alpha"] = str(self.weight.alpha)
            out["beta"] = str(self.weight.beta)
        if self.weight.kind == "tabulated":
            out["samples"] = [[str(x), str(y)] for x, y in self.weight.samples]
        return out

    @classmethod
    def from_config(cls, block: dict) -> "MeasureSpec":
        a, b = block["interval"]
        kind = block.get("weight", "uniform")
        w = WeightSpec(kind, alpha=block.get("alpha", 0), beta=block.get("beta", 0),
                       samples=tuple(tuple(s) for s in block.get("samples", ())))
        return cls(Interval(a, b), w, int(block.get("sign", 1)))


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and (signed) weights discretizing one measure.

    ``exact_degree`` is the largest ``p`` for which ``sum(w * x**p)`` equals
    the exact moment (up to rounding at ``precision`` bits).
    """

    interval: Interval
    nodes: tuple
    weights: tuple
    precision: int
    exact_degree: int
    sign: int = 1
    node_count: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "node_count", len(self.nodes))

    @property
    def mass(self):
        with mpmath.workprec(self.precision):
            return mpmath.fsum(self.weights)

    def nodes_float(self) -> np.ndarray:
        return np.array([float(x) for x in self.nodes])


def _jacobi_recurrence(alpha, beta, n: int):
    """Monic recurrence ``p_{k+1} = (t - a_k) p_k - b_k p_{k-1}`` on [-1, 1].

    ``b[0]`` is the total mass of the weight.
    """
    ab = alpha + beta
    a = []
    b = []
    for k in range(n):
        s = 2 * k + ab
        if k == 0:
            a.append((beta - alpha) / (ab + 2))
        else:
            a.append((beta * beta - alpha * alpha) / (s * (s + 2)))
        if k == 0:
            b.append(mpmath.power(2, ab + 1) * mpmath.gamma(alpha + 1)
                     * mpmath.gamma(beta + 1) / mpmath.gamma(ab + 2))
        elif k == 1:
            b.append(4 * (alpha + 1) * (beta + 1) / ((ab + 2) ** 2 * (ab + 3)))
        else:
            b.append(4 * k * (k + alpha) * (k + beta) * (k + ab)
                     / (s * s * (s + 1) * (s - 1)))
    return a, b


def _gauss_from_recurrence(a, b, guesses, prec: int):
    """Newton-polish ``guesses`` to zeros of the monic p_N, then weights.

    Newton runs with doubling precision (the start points carry ~50 bits);
    weights use ``w_i = ||p_{N-1}||**2 / (p_{N-1}(t_i) p_N'(t_i))``.
    """
    n = len(a)
    schedule = []
    bits = 48
    while bits < prec:
        bits = min(2 * bits, prec)
        schedule.append(bits)
    schedule += [prec, prec]
    with _mpfr.context(prec):
        ga = [_mpfr.to_mpfr(v, prec) for v in a]
        gb = [_mpfr.to_mpfr(v, prec) for v in b]
        norm_last = gmpy2.mpfr(1)
        for v in gb[:n]:
            norm_last *= v
    nodes, weights = [], []
    for g in guesses:
        t = gmpy2.mpfr(float(g))
        for bits in schedule:
            with _mpfr.context(bits + 8):
                t = +t
                p_prev, p = gmpy2.mpfr(0), gmpy2.mpfr(1)
                d_prev, d = gmpy2.mpfr(0), gmpy2.mpfr(0)
                for k in range(n):
                    tk = t - ga[k]
                    if k:
                        p_next = tk * p - gb[k] * p_prev
                        d_next = p + tk * d - gb[k] * d_prev
                    else:
                        p_next = tk * p
                        d_next = p + tk * d
                    p_prev, p = p, p_next
                    d_prev, d = d, d_next
                t = t - p / d
        with _mpfr.context(prec):
            nodes.append(_mpfr.from_mpfr(t))
            weights.append(_mpfr.from_mpfr(norm_last / (p_prev * d)))
    return nodes, weights


@functools.lru_cache(maxsize=128)
def _reference_rule(weight: WeightSpec, n: int, prec: int):
    """Gauss rule on [-1, 1] for the named families."""
    with mpmath.workprec(prec + 24):
        if weight.kind == "chebyshev":
            nodes = [-mpmath.cos((2 * i - 1) * mpmath.pi / (2 * n)) for i in range(1, n + 1)]
            weights = [mpmath.pi / n] * n
        else:
            alpha = mp_value(weight.alpha)
            beta = mp_value(weight.beta)
            a, b = _jacobi_recurrence(alpha, beta, n)
            guesses, _ = special.roots_jacobi(n, float(weight.alpha), float(weight.beta))
            nodes, weights = _gauss_from_recurrence(a, b, sorted(guesses), prec + 24)
    return tuple(nodes), tuple(weights)


def _tabulated_rule(spec: MeasureSpec, node_count: int, prec: int):
    samples = spec.weight.samples
    panels = len(samples) - 1
    per_panel = max(1, -(-node_count // panels))
    ref_nodes, ref_weights = _reference_rule(WeightSpec("uniform"), per_panel, prec)
    nodes, weights = [], []
    with mpmath.workprec(prec + 24):
        for (x0, w0), (x1, w1) in zip(samples[:-1], samples[1:]):
            x0m, x1m, w0m, w1m = (mp_value(v) for v in (x0, x1, w0, w1))
            half = (x1m - x0m) / 2
            mid = (x1m + x0m) / 2
            for t, wt in zip(ref_nodes, ref_weights):
                x = mid + half * t
                lam = (x - x0m) / (x1m - x0m)
                nodes.append(x)
                weights.append(wt * half * (w0m + lam * (w1m - w0m)))
    # linear weight times Gauss on each panel: exact up to degree 2k - 2
    return nodes, weights, 2 * per_panel - 2


def build_quadrature(spec: MeasureSpec, node_count: int, precision: int = 512) -> QuadratureRule:
    """Gauss-type rule for ``spec`` with ``node_count`` nodes.

    For the named families the rule is exact for polynomials of degree
    ``2*node_count - 1``. Tabulated weights get a composite Gauss-Legendre
    rule aligned with the sample abscissae.
    """
    if node_count < 1:
        raise ValueError("node_count must be >= 1")
    if precision < 64:
        raise ValueError("precision must be at least 64 bits")
    return _build_quadrature(spec, int(node_count), int(precision))


@functools.lru_cache(maxsize=64)
def _build_quadrature(spec: MeasureSpec, node_count: int, precision: int) -> QuadratureRule:
    if spec.weight.kind == "tabulated":
        nodes, weights, exact = _tabulated_rule(spec, node_count, precision)
        with mpmath.workprec(precision):
            nodes = tuple(+x for x in nodes)
            weights = tuple(spec.sign * w for w in weights)
        return QuadratureRule(spec.interval, nodes, weights, precision, exact, spec.sign)
    ref_nodes, ref_weights = _reference_rule(spec.weight, node_count, precision)
    with mpmath.workprec(precision + 24):
        a, b = spec.interval.endpoints()
        half = (b - a) / 2
        mid = (b + a) / 2
        nodes = [mid + half * t for t in ref_nodes]
        weights = [spec.sign * w * half for w in ref_weights]
    with mpmath.workprec(precision):
        nodes = tuple(+x for x in nodes)
        weights = tuple(+w for w in weights)
    return QuadratureRule(spec.interval, nodes, weights, precision,
                          2 * node_count - 1, spec.sign)


def moments(rule: QuadratureRule, p_max: int) -> list:
    """``[c_0, ..., c_{p_max}]`` with ``c_p = sum(w * x**p)``.

    Emits :class:`DegradedAccuracyWarning` when ``p_max`` exceeds the
    exactness degree of the rule.
    """
    if p_max > rule.exact_degree:
        warnings.warn(f"moment degree {p_max} exceeds rule exactness "
                      f"{rule.exact_degree}", DegradedAccuracyWarning, stacklevel=2)
    return weighted_moments(rule.nodes, rule.weights, p_max, rule.precision)


def weighted_moments(nodes: Sequence, weights: Sequence, p_max: int, prec: int) -> list:
    with mpmath.workprec(prec + 16):
        out = []
        powers = list(weights)
        for _ in range(p_max + 1):
            out.append(mpmath.fsum(powers))
            powers = [w * x for w, x in zip(powers, nodes)]
    with mpmath.workprec(prec):
        return [+c for c in out]


def default_boundary_eps(interval: Interval):
    return mpmath.mpf(10) ** -6 * mp_value(interval.length)


def discrete_transform(nodes: Sequence, weights: Sequence, z, prec: int):
    """``sum(w / (z - x))``, real when ``z`` is real."""
    with mpmath.workprec(prec):
        z = mpmath.mpmathify(z)
        if isinstance(z, mpmath.mpc) and z.imag == 0:
            z = z.real
        return mpmath.fsum(w / (z - x) for x, w in zip(nodes, weights))


def cauchy_transform(rule: QuadratureRule, z, eps=None):
    """Cauchy transform ``sum(w / (z - x))`` of the discretized measure.

    Raises :class:`NearSupportError` when ``z`` lies within ``eps``
    (default ``1e-6`` times the interval length) of the interval.
    """
    eps = default_boundary_eps(rule.interval) if eps is None else eps
    with mpmath.workprec(rule.precision):
        if distance_to_interval(z, rule.interval) < eps:
            raise NearSupportError(f"z={z} is within {mpmath.nstr(eps, 3)} of "
                                   f"the support {rule.interval}")
    return discrete_transform(rule.nodes, rule.weights, z, rule.precision)
