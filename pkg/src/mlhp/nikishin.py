"""Nikishin hierarchies of discretized measures and their rational perturbation.

Every level ``j`` carries a Gauss rule for ``sigma_j``. The nested measure
``s_{j,k}`` (increasing or decreasing index chain) is again a discrete
measure on the nodes of ``Delta_j``: its weights are the level-``j`` weights
multiplied by the next-inner transform evaluated at those nodes. All nested
weights are computed once, when the system is built.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import gmpy2
import mpmath

from . import _mpfr
from .measures import (
    Interval,
    MeasureSpec,
    NearSupportError,
    QuadratureRule,
    build_quadrature,
    default_boundary_eps,
    discrete_transform,
    distance_to_interval,
    mp_value,
    weighted_moments,
)
from .polynomials import (
    poly_derivative,
    poly_divmod,
    poly_eval,
    poly_gcd,
    poly_lcm,
    poly_monic,
    poly_roots,
    poly_trim,
    squarefree_decomposition,
    to_fraction,
)

__all__ = [
    "NikishinSystem",
    "RationalPerturbation",
    "PoleReport",
    "build_perturbation",
    "eval_nested_transform",
    "eval_fraction",
    "eval_T",
    "eval_f",
    "check_pole_count",
    "HypothesisError",
]


class HypothesisError(ValueError):
    """Input violates a structural hypothesis (disjointness, pole placement...)."""


class NikishinSystem:
    """Discretized Nikishin system ``N(sigma_1, ..., sigma_m)``.

    Parameters
    ----------
    specs : sequence of MeasureSpec
        Generating measures, level 1 first. Consecutive intervals must be
        disjoint.
    node_count : int
        Gauss nodes per level.
    precision : int
        Working precision in bits.
    """

    def __init__(self, specs: Sequence[MeasureSpec], node_count: int, precision: int = 512):
        specs = tuple(specs)
        if not specs:
            raise ValueError("a Nikishin system needs at least one measure")
        for j in range(len(specs) - 1):
            if specs[j].interval.intersects(specs[j + 1].interval):
                raise HypothesisError(
                    f"consecutive intervals must be disjoint: Delta_{j + 1}="
                    f"{specs[j].interval} meets Delta_{j + 2}={specs[j + 1].interval}")
        self.specs = specs
        self.m = len(specs)
        self.precision = int(precision)
        self.node_count = int(node_count)
        self.rules: tuple[QuadratureRule, ...] = tuple(
            build_quadrature(s, node_count, precision) for s in specs)
        self._nested = {}
        self._moments = {}
        self._gmp = {}
        self._lock = threading.Lock()
        with mpmath.workprec(self.precision + 16):
            for j in range(1, self.m + 1):
                self._nested[(j, j)] = self.rules[j - 1].weights
            for span in range(1, self.m):
                for j in range(1, self.m - span + 1):
                    k = j + span
                    # increasing chain s_{j,k} lives on Delta_j
                    self._nested[(j, k)] = self._weighted_by_inner(j, j + 1, k)
                    # decreasing chain s_{k,j} lives on Delta_k
                    self._nested[(k, j)] = self._weighted_by_inner(k, k - 1, j)
        with mpmath.workprec(self.precision):
            self._nested = {key: tuple(+w for w in ws) for key, ws in self._nested.items()}

    def _weighted_by_inner(self, level, inner_start, inner_end):
        rule = self.rules[level - 1]
        inner_nodes = self.rules[inner_start - 1].nodes
        inner_w = self._nested[(inner_start, inner_end)]
        out = []
        for x, w in zip(rule.nodes, rule.weights):
            out.append(w * mpmath.fsum(v / (x - t) for t, v in zip(inner_nodes, inner_w)))
        return tuple(out)

    @property
    def intervals(self) -> tuple[Interval, ...]:
        return tuple(s.interval for s in self.specs)

    def interval(self, j: int) -> Interval:
        return self.specs[j - 1].interval

    def rule(self, j: int) -> QuadratureRule:
        return self.rules[j - 1]

    def _check_index(self, j, k):
        if not (1 <= j <= self.m and 1 <= k <= self.m):
            raise IndexError(f"indices ({j}, {k}) out of range for m={self.m}")

    def nested_measure(self, j: int, k: int):
        """Nodes (on Delta_j) and weights of ``s_{j,k}``; ``j > k`` is the
        decreasing chain ``<sigma_j, sigma_{j-1}, ..., sigma_k>``."""
        self._check_index(j, k)
        return self.rules[j - 1].nodes, self._nested[(j, k)]

    def nested_moments(self, j: int, k: int, count: int) -> list:
        """First ``count`` moments of ``s_{j,k}`` (cached)."""
        key = (j, k)
        with self._lock:
            cached = self._moments.get(key)
            if cached is None or len(cached) < count:
                nodes, weights = self.nested_measure(j, k)
                cached = weighted_moments(nodes, weights, max(count, 1) - 1, self.precision)
                self._moments[key] = cached
        return cached[:count]

    def _real_transform(self, j, k, x):
        """Fast path for real arguments: the sum runs on gmpy2 numbers."""
        prec = self.precision + 16
        with self._lock:
            data = self._gmp.get((j, k))
            if data is None:
                nodes, weights = self.nested_measure(j, k)
                with _mpfr.context(prec):
                    data = ([_mpfr.to_mpfr(v, prec) for v in nodes],
                            [_mpfr.to_mpfr(v, prec) for v in weights])
                self._gmp[(j, k)] = data
        with _mpfr.context(prec):
            xg = _mpfr.to_mpfr(x, prec)
            total = gmpy2.fsum([w / (xg - t) for t, w in zip(*data)])
            out = _mpfr.from_mpfr(total)
        with mpmath.workprec(self.precision):
            return +out

    def reflected(self) -> "NikishinSystem":
        return NikishinSystem([s.reflected() for s in self.specs],
                              self.node_count, self.precision)

    def __repr__(self):
        ivs = ", ".join(str(s.interval) for s in self.specs)
        return (f"NikishinSystem(m={self.m}, intervals=({ivs}), "
                f"N={self.node_count}, P={self.precision})")


def eval_nested_transform(sys: NikishinSystem, j: int, k: int, z, eps=None):
    """``hat s_{j,k}(z)``: increasing chain for ``j <= k``, decreasing for ``j > k``."""
    sys._check_index(j, k)
    iv = sys.interval(j)
    eps = default_boundary_eps(iv) if eps is None else eps
    with mpmath.workprec(sys.precision):
        if distance_to_interval(z, iv) < eps:
            raise NearSupportError(f"z={z} is too close to Delta_{j}={iv}")
    z = mpmath.mpmathify(z)
    if isinstance(z, mpmath.mpc) and z.imag == 0:
        z = z.real
    if isinstance(z, mpmath.mpf):
        return sys._real_transform(j, k, z)
    nodes, weights = sys.nested_measure(j, k)
    return discrete_transform(nodes, weights, z, sys.precision)


@dataclass(frozen=True)
class RationalPerturbation:
    """Fractions ``r_k = v_k / t_k`` (exact rationals, ascending coefficients).

    ``t_k`` are stored monic; ``T`` is their lcm, ``D = deg T`` and
    ``zeros`` lists the distinct roots of ``T`` with multiplicities.
    """

    numerators: tuple
    denominators: tuple
    T: tuple
    D: int
    zeros: tuple = field(default=())          # ((root, multiplicity), ...)
    precision: int = 512

    @property
    def m(self) -> int:
        return len(self.numerators)

    def is_zero(self, k: int) -> bool:
        return all(c == 0 for c in self.numerators[k - 1])

    def root_list(self) -> list:
        """Roots of ``T`` repeated by multiplicity."""
        out = []
        for z, tau in self.zeros:
            out.extend([z] * tau)
        return out

    def to_config(self) -> list:
        return [{"numerator": [str(c) for c in v], "denominator": [str(c) for c in t]}
                for v, t in zip(self.numerators, self.denominators)]


def _poly_size(p, z):
    return sum(abs(c) * abs(z) ** i for i, c in enumerate(p)) or 1


def build_perturbation(fractions: Sequence, m: int | None = None, precision: int = 512,
                       intervals: Sequence[Interval] | None = None,
                       margin=None) -> RationalPerturbation:
    """Assemble ``(r_1, ..., r_m)`` from ``(v_k, t_k)`` pairs.

    ``None`` or a missing entry means ``r_k = 0``. Coefficients are ascending
    and converted to exact rationals, so ``T = lcm(t_1, ..., t_m)`` and
    ``D`` are computed exactly. When ``intervals`` is given, every root of
    ``T`` must keep a distance of at least ``margin`` (default ``1e-3`` times
    the interval length) from ``Delta_1`` and ``Delta_m``.
    """
    fractions = list(fractions)
    if m is None:
        m = len(fractions)
    if len(fractions) > m:
        raise ValueError(f"got {len(fractions)} fractions for m={m}")
    fractions += [None] * (m - len(fractions))
    nums, dens = [], []
    for k, fr in enumerate(fractions, start=1):
        if fr is None:
            nums.append((Fraction(0),))
            dens.append((Fraction(1),))
            continue
        v, t = fr
        v = poly_trim([to_fraction(c) for c in v])
        t = poly_trim([to_fraction(c) for c in t])
        if len(t) == 1 and t[0] == 0:
            raise ValueError(f"r_{k}: zero denominator")
        lead = t[-1]
        t = [c / lead for c in t]
        v = [c / lead for c in v]
        if all(c == 0 for c in v):
            nums.append((Fraction(0),))
            dens.append((Fraction(1),))
            continue
        if len(v) >= len(t):
            raise ValueError(f"r_{k}: need deg v_k < deg t_k")
        if len(poly_gcd(v, t)) > 1:
            raise HypothesisError(f"r_{k}: numerator and denominator are not coprime")
        nums.append(tuple(v))
        dens.append(tuple(t))
    T = [Fraction(1)]
    for t in dens:
        T = poly_lcm(T, t)
    T = tuple(poly_monic(T))
    D = len(T) - 1
    zeros = []
    with mpmath.workprec(precision):
        for factor, mult in squarefree_decomposition(T):
            if len(factor) == 2:
                roots = [mpmath.mpf(-factor[0].numerator) / factor[0].denominator]
            else:
                roots = list(poly_roots([mp_value(c) for c in factor], precision).roots)
            for r in roots:
                if isinstance(r, mpmath.mpc) and abs(r.imag) <= mpmath.mpf(2) ** (-precision // 2) * max(1, abs(r)):
                    r = r.real
                zeros.append((r, mult))
        zeros.sort(key=lambda zm: (mpmath.re(zm[0]), mpmath.im(zm[0])))
        if intervals is not None and zeros:
            ends = [intervals[0], intervals[-1]]
            for r, _ in zeros:
                for iv in ends:
                    gap = mp_value(iv.length) / 1000 if margin is None else mpmath.mpf(margin)
                    if distance_to_interval(r, iv) < gap:
                        raise HypothesisError(
                            f"zero {mpmath.nstr(r, 8)} of T lies within "
                            f"{mpmath.nstr(gap, 3)} of {iv}")
    return RationalPerturbation(tuple(nums), tuple(dens), T, D, tuple(zeros), precision)


def eval_fraction(pert: RationalPerturbation, k: int, z):
    v = pert.numerators[k - 1]
    t = pert.denominators[k - 1]
    with mpmath.workprec(pert.precision):
        if all(c == 0 for c in v):
            return mpmath.mpf(0) * z
        return poly_eval([mp_value(c) for c in v], z) / poly_eval([mp_value(c) for c in t], z)


def eval_T(pert: RationalPerturbation, z):
    with mpmath.workprec(pert.precision):
        return poly_eval([mp_value(c) for c in pert.T], mpmath.mpmathify(z))


def eval_f(sys: NikishinSystem, pert: RationalPerturbation, z):
    """``hat s_{m,1} - sum_{k<m} (-1)^k hat s_{m,k+1} r_k - (-1)^m r_m``."""
    m = sys.m
    with mpmath.workprec(sys.precision):
        z = mpmath.mpmathify(z)
        for root, _ in pert.zeros:
            if abs(z - root) < mpmath.mpf(2) ** (-sys.precision // 4) * max(1, abs(root)):
                raise ValueError(f"f evaluated at a pole of the perturbation ({root})")
        total = eval_nested_transform(sys, m, 1, z)
        for k in range(1, m):
            if not pert.is_zero(k):
                total -= (-1) ** k * eval_nested_transform(sys, m, k + 1, z) * eval_fraction(pert, k, z)
        if not pert.is_zero(m):
            total -= (-1) ** m * eval_fraction(pert, m, z)
        return total


@dataclass(frozen=True)
class PoleReport:
    root: object
    multiplicity: int
    limit: object            # value of lim (z - zeta)^tau f(z)
    scale: object            # sum of the magnitudes of the contributing terms
    passed: bool


def _fraction_limit(pert: RationalPerturbation, k: int, root, tau: int):
    """``lim_{z->root} (z - root)^tau r_k(z)``, read off the Taylor data of t_k."""
    if pert.is_zero(k):
        return mpmath.mpf(0)
    t = [mp_value(c) for c in pert.denominators[k - 1]]
    v = [mp_value(c) for c in pert.numerators[k - 1]]
    d = t
    for _ in range(tau):
        d = poly_derivative(d)
    tol = mpmath.mpf(2) ** (-pert.precision // 4)
    # multiplicity of root in t_k below tau -> limit vanishes
    probe = t
    for _ in range(tau):
        if abs(poly_eval(probe, root)) > tol * _poly_size(probe, root):
            return mpmath.mpf(0)
        probe = poly_derivative(probe)
    return poly_eval(v, root) * math.factorial(tau) / poly_eval(d, root)


def check_pole_count(sys: NikishinSystem, pert: RationalPerturbation) -> list[PoleReport]:
    """Evaluate the residue-type criterion at every zero of ``T``.

    A zero ``zeta`` of multiplicity ``tau`` passes when
    ``lim (z - zeta)^tau f(z)`` is not (numerically) zero, tolerance
    ``2**(-P/4)`` relative to the size of the contributing terms.
    """
    m = sys.m
    out = []
    with mpmath.workprec(sys.precision):
        tol = mpmath.mpf(2) ** (-sys.precision // 4)
        for root, tau in pert.zeros:
            terms = []
            for k in range(1, m):
                lim = _fraction_limit(pert, k, root, tau)
                if lim != 0:
                    terms.append(-(-1) ** k * eval_nested_transform(sys, m, k + 1, root) * lim)
            lim = _fraction_limit(pert, m, root, tau)
            if lim != 0:
                terms.append(-(-1) ** m * lim)
            value = mpmath.fsum(terms) if terms else mpmath.mpf(0)
            scale = mpmath.fsum(abs(t) for t in terms) if terms else mpmath.mpf(0)
            passed = scale != 0 and abs(value) > tol * scale
            out.append(PoleReport(root, tau, value, scale, bool(passed)))
    return out
