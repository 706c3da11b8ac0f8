"""Multi-level Hermite-Pade polynomials by Laurent coefficient matching.

The order conditions at infinity are linear in the polynomial coefficients.
The conditions on the first form pin the coefficients at powers
``z**(n-1) ... z**(-n)``; each intermediate form pins ``z**(n-1) ... z**0``.
This gives ``(m+1)*n`` rows for ``(m+1)*n + 1`` unknowns; the kernel is
computed at full working precision and normalized so that ``a_{n,m}`` is
monic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from .linalg import kernel
from .measures import mp_value
from .nikishin import NikishinSystem, RationalPerturbation
from .polynomials import poly_eval

__all__ = [
    "LaurentSeries",
    "HPSolution",
    "DegenerateIndexError",
    "QuadratureDepthError",
    "laurent_of_transform",
    "laurent_of_fraction",
    "build_system",
    "solve_hp",
    "OrthogonalityReport",
    "verify_orthogonality",
]


class DegenerateIndexError(RuntimeError):
    """The kernel of the order conditions has dimension above one.

    :attr:`nullity` carries the estimate and :attr:`solution` a canonical
    representative.
    """

    def __init__(self, message, nullity, solution=None):
        super().__init__(message)
        self.nullity = nullity
        self.solution = solution


class QuadratureDepthError(ValueError):
    """More Laurent coefficients were requested than the rule integrates exactly."""


@dataclass(frozen=True)
class LaurentSeries:
    """Truncated expansion ``sum_i coeffs[i] * z**(top_power - i)``."""

    top_power: int
    coeffs: tuple

    @property
    def length(self) -> int:
        return len(self.coeffs)

    @property
    def bottom_power(self) -> int:
        return self.top_power - len(self.coeffs) + 1

    def coefficient(self, power: int):
        i = self.top_power - power
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        if power > self.top_power:
            return 0
        raise IndexError(f"power {power} below the truncation {self.bottom_power}")

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        top = max(self.top_power, other.top_power)
        bottom = max(self.bottom_power, other.bottom_power)
        return LaurentSeries(top, tuple(self.coefficient(p) + other.coefficient(p)
                                        for p in range(top, bottom - 1, -1)))

    def times_poly(self, poly: Sequence) -> "LaurentSeries":
        """Product with an ascending-coefficient polynomial.

        The result keeps only the powers that are fully determined by the
        stored coefficients.
        """
        deg = len(poly) - 1
        top = self.top_power + deg
        bottom = self.bottom_power + deg
        out = []
        for p in range(top, bottom - 1, -1):
            acc = 0
            for i, c in enumerate(poly):
                q = p - i
                if q <= self.top_power:
                    acc = acc + c * self.coefficient(q)
            out.append(acc)
        return LaurentSeries(top, tuple(out))


def laurent_of_transform(sys: NikishinSystem, j: int, k: int, n_terms: int) -> LaurentSeries:
    """Expansion of ``hat s_{j,k}`` at infinity: powers ``z**-1 ... z**-n_terms``.

    Coefficients are the moments of the discrete nested measure.
    """
    rule = sys.rule(j)
    if n_terms - 1 > rule.exact_degree:
        raise QuadratureDepthError(
            f"{n_terms} Laurent terms need exactness degree {n_terms - 1}, "
            f"rule on Delta_{j} has {rule.exact_degree}; increase node_count")
    return LaurentSeries(-1, tuple(sys.nested_moments(j, k, n_terms)))


def _fraction_series(v: Sequence[Fraction], t: Sequence[Fraction], n_terms: int) -> list:
    """Exact coefficients ``e_1, e_2, ...`` of ``v/t = sum e_s z**-s``."""
    d = len(t) - 1
    e = [Fraction(0)] * (n_terms + 1)
    for s in range(1, n_terms + 1):
        acc = v[d - s] if 0 <= d - s < len(v) else Fraction(0)
        for i in range(max(0, d - s + 1), d):
            acc -= t[i] * e[i - d + s]
        e[s] = acc / t[d]
    return e[1:]


def laurent_of_fraction(pert: RationalPerturbation, k: int, n_terms: int) -> LaurentSeries:
    """Expansion of ``r_k`` at infinity by long division in descending powers."""
    v = pert.numerators[k - 1]
    t = pert.denominators[k - 1]
    if all(c == 0 for c in v):
        exact = [Fraction(0)] * n_terms
    else:
        exact = _fraction_series(v, t, n_terms)
    with mpmath.workprec(pert.precision):
        return LaurentSeries(-1, tuple(mp_value(c) for c in exact))


@dataclass(frozen=True)
class HPSolution:
    """ML Hermite-Pade tuple ``(a_{n,0}, ..., a_{n,m})``, ascending coefficients."""

    n: int
    coeffs: tuple
    precision: int
    residual: object
    scale: object
    nullity: int
    degenerate: bool = False
    min_pivot_ratio: object = None

    @property
    def m(self) -> int:
        return len(self.coeffs) - 1

    def a(self, j: int) -> tuple:
        return self.coeffs[j]

    def eval_poly(self, j: int, z):
        with mpmath.workprec(self.precision):
            return poly_eval(self.coeffs[j], mpmath.mpmathify(z))

    @property
    def relative_residual(self):
        return self.residual / self.scale if self.scale else self.residual

    def to_json(self) -> dict:
        digits = int(self.precision * 0.30103) + 2
        s = lambda x: mpmath.nstr(x, digits, min_fixed=1, max_fixed=0)
        return {"n": self.n, "m": self.m, "precision": self.precision,
                "nullity": self.nullity, "degenerate": self.degenerate,
                "residual": s(self.residual), "scale": s(self.scale),
                "min_pivot_ratio": s(self.min_pivot_ratio),
                "coeffs": [[s(c) for c in a] for a in self.coeffs]}

    @classmethod
    def from_json(cls, data: dict) -> "HPSolution":
        prec = int(data["precision"])
        with mpmath.workprec(prec):
            return cls(n=int(data["n"]),
                       coeffs=tuple(tuple(mpmath.mpf(c) for c in a) for a in data["coeffs"]),
                       precision=prec, residual=mpmath.mpf(data["residual"]),
                       scale=mpmath.mpf(data["scale"]), nullity=int(data["nullity"]),
                       degenerate=bool(data["degenerate"]),
                       min_pivot_ratio=mpmath.mpf(data["min_pivot_ratio"]))


def _layout(m: int, n: int):
    """Column offsets of each polynomial in the unknown vector."""
    offsets = [j * n for j in range(m + 1)]
    sizes = [n] * m + [n + 1]
    return offsets, sizes


def build_system(sys: NikishinSystem, pert: RationalPerturbation, n: int) -> list:
    """Rows of the homogeneous system (list of lists of mpf)."""
    m = sys.m
    if pert.m != m:
        raise ValueError(f"perturbation has {pert.m} fractions, system has m={m}")
    offsets, sizes = _layout(m, n)
    n_cols = offsets[-1] + sizes[-1]
    n_terms = 2 * n
    rows = []
    with mpmath.workprec(sys.precision):
        # first form: a_0 + sum (-1)^k a_k (s_{1,k} + r_k), powers n-1 .. -n
        g = []
        for k in range(1, m + 1):
            series = laurent_of_transform(sys, 1, k, n_terms) + laurent_of_fraction(pert, k, n_terms)
            g.append(series)
        for p in range(n - 1, -n - 1, -1):
            row = [mpmath.mpf(0)] * n_cols
            if 0 <= p <= n - 1:
                row[offsets[0] + p] += 1
            for k in range(1, m + 1):
                sign = (-1) ** k
                for i in range(sizes[k]):
                    q = i - p - 1
                    if q >= 0:
                        row[offsets[k] + i] += sign * g[k - 1].coefficient(-q - 1)
            rows.append(row)
        # intermediate forms: (-1)^j a_j + sum_{k>j} (-1)^k a_k s_{j+1,k}, powers n-1 .. 0
        for j in range(1, m):
            series = {k: laurent_of_transform(sys, j + 1, k, n) for k in range(j + 1, m + 1)}
            for p in range(n - 1, -1, -1):
                row = [mpmath.mpf(0)] * n_cols
                row[offsets[j] + p] += (-1) ** j
                for k in range(j + 1, m + 1):
                    sign = (-1) ** k
                    for i in range(sizes[k]):
                        q = i - p - 1
                        if q >= 0:
                            row[offsets[k] + i] += sign * series[k].coefficient(-q - 1)
                rows.append(row)
    return rows


def _split(vec, m, n):
    offsets, sizes = _layout(m, n)
    return tuple(tuple(vec[o:o + s]) for o, s in zip(offsets, sizes))


def _residual(rows, vec):
    res = mpmath.mpf(0)
    scale = mpmath.mpf(0)
    for row in rows:
        terms = [r * x for r, x in zip(row, vec) if r != 0]
        res = max(res, abs(mpmath.fsum(terms)))
        scale = max(scale, mpmath.fsum(abs(t) for t in terms))
    return res, scale


def solve_hp(sys: NikishinSystem, pert: RationalPerturbation, n: int,
             precision: int | None = None) -> HPSolution:
    """Solve the order conditions for index ``n``.

    Raises :class:`DegenerateIndexError` when the numerical kernel (relative
    pivot threshold ``2**(-P/2)``) has dimension above one. A solution with
    ``deg a_{n,m} < n`` is returned with ``degenerate=True``, scaled to unit
    norm with the top surviving coefficient of ``a_{n,m}`` positive.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    prec = sys.precision if precision is None else int(precision)
    if prec > sys.precision:
        raise ValueError(f"system was discretized at {sys.precision} bits; "
                         f"cannot solve at {prec}")
    m = sys.m
    rows = build_system(sys, pert, n)
    ker = kernel(rows, prec)
    with mpmath.workprec(prec):
        offsets, sizes = _layout(m, n)
        lead_index = offsets[m] + n
        if ker.nullity > 1:
            vec = min(ker.basis, key=mpmath.norm)
            vec = _canonical(vec, offsets[m], sizes[m])
            res, scale = _residual(rows, vec)
            sol = HPSolution(n, _split(vec, m, n), prec, res, scale, ker.nullity,
                             degenerate=True, min_pivot_ratio=ker.min_pivot_ratio)
            raise DegenerateIndexError(f"index n={n} is degenerate: kernel dimension "
                                       f"{ker.nullity}", ker.nullity, sol)
        vec = list(ker.basis[0])
        size = max(abs(v) for v in vec)
        lead = vec[lead_index]
        degenerate = abs(lead) <= mpmath.mpf(2) ** (-prec // 4) * size
        if degenerate:
            vec = _canonical(vec, offsets[m], sizes[m])
        else:
            vec = [v / lead for v in vec]
            vec[lead_index] = mpmath.mpf(1)
        res, scale = _residual(rows, vec)
        return HPSolution(n, _split(vec, m, n), prec, res, scale, ker.nullity,
                          degenerate=bool(degenerate), min_pivot_ratio=ker.min_pivot_ratio)


def _canonical(vec, offset, size):
    norm = mpmath.norm(vec)
    vec = [v / norm for v in vec]
    block = vec[offset:offset + size]
    big = max(abs(v) for v in block)
    for v in reversed(block):
        if abs(v) > mpmath.mpf(2) ** (-mpmath.mp.prec // 4) * big:
            if v < 0:
                vec = [-x for x in vec]
            break
    return vec


@dataclass(frozen=True)
class OrthogonalityReport:
    """Orthogonality integrals per equation, each with the magnitude scale
    ``sum |w x^nu (terms)|`` that a perfectly cancelling sum is measured against."""

    entries: tuple         # (label, j, nu, value, scale)

    @property
    def max_relative(self):
        rel = [abs(v) / s if s else abs(v) for _, _, _, v, s in self.entries]
        return max(rel) if rel else mpmath.mpf(0)

    def by_label(self, label: str) -> list:
        return [e for e in self.entries if e[0] == label]


def verify_orthogonality(sys: NikishinSystem, pert: RationalPerturbation, sol: HPSolution,
                         fact=None) -> OrthogonalityReport:
    """Orthogonality of the forms against monomials, by quadrature.

    Always checks ``int x^nu A_{n,1} T dsigma_1 = 0``; with a factorization
    also ``int x^nu A_{n,j+1} dsigma_{j+1} / Q_{n,j} = 0`` for
    ``j = 1, ..., m-1``. In both cases ``nu = 0, ..., n - D - 1``.
    """
    from .forms import form_with_scale, eval_Q

    n, m = sol.n, sys.m
    count = n - pert.D
    entries = []
    with mpmath.workprec(sol.precision):
        rule = sys.rule(1)
        T = [mp_value(c) for c in pert.T]
        vals = []
        for x, w in zip(rule.nodes, rule.weights):
            a1, s1 = form_with_scale(sys, pert, sol, 1, x)
            tx = poly_eval(T, x)
            vals.append((x, w * a1 * tx, abs(w * tx) * s1))
        for nu in range(count):
            terms = [v * x ** nu for x, v, _ in vals]
            scale = mpmath.fsum(s * abs(x) ** nu for x, _, s in vals)
            entries.append(("T*A1", 1, nu, mpmath.fsum(terms), scale))
        if fact is not None:
            for j in range(1, m):
                rule = sys.rule(j + 1)
                vals = []
                for x, w in zip(rule.nodes, rule.weights):
                    a, s = form_with_scale(sys, pert, sol, j + 1, x)
                    q = eval_Q(fact, j, x)
                    vals.append((x, w * a / q, abs(w / q) * s))
                for nu in range(count):
                    terms = [v * x ** nu for x, v, _ in vals]
                    scale = mpmath.fsum(s * abs(x) ** nu for x, _, s in vals)
                    entries.append(("A/Q", j, nu, mpmath.fsum(terms), scale))
    return OrthogonalityReport(tuple(entries))
