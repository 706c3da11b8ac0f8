"""Measured Hermite-Pade data against the equilibrium predictions.

Each check returns a list of :class:`Record`. Limits are compared on the
exponent scale: ``measured = log|quantity| / n`` against the predicted field,
and ``gap = measured - predicted``. Distances (CDF, outlier matching) and
identity residuals use ``predicted = 0`` and ``gap = measured``.

Trend verdicts look at the absolute gap over the trailing half of the
computed indices and require it to be nonincreasing. Values below a floor
(the working tolerance) are clamped to the floor first, so a sequence that
sits at the rounding level does not count as oscillating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import mpmath
import numpy as np
from scipy.optimize import linear_sum_assignment

from .equilibrium import (DiscreteMeasure, EquilibriumSolution, cdf_distance, form_exponent,
                          partial_sums, rate_exponent, ratio_exponent)
from .forms import FormFactorization, eval_form, form_with_scale, weighted_norm
from .hp_solver import HPSolution
from .nikishin import NikishinSystem, RationalPerturbation, eval_f, eval_fraction, eval_nested_transform

__all__ = [
    "CLAIMS",
    "Record",
    "AsymptoticReport",
    "ExcludedPointError",
    "sample_z_points",
    "trend_verdict",
    "zero_distribution_check",
    "norm_limit_check",
    "form_asymptotics_check",
    "ratio_and_recovery_check",
    "identity_residuals",
    "rate_check",
    "pole_attraction_check",
    "summarize",
]

CLAIMS = ("weak_Qnj", "limit_nesimo", "limit_nrooth_Anj", "ratio_Anj", "recover",
          "geometric_speed", "geometric_speed_an0", "pole_attraction")

# claims tested one-sided (measured <= predicted + slack) instead of by a limit
ONE_SIDED = {"geometric_speed_an0"}


class ExcludedPointError(ValueError):
    """A z-point lies on a set where the checked field is undefined."""


@dataclass(frozen=True)
class Record:
    """One measurement.

    ``quantity`` names what ``measured`` holds (``cdf_distance``,
    ``norm_exponent``, ``form_exponent``, ``ratio_exponent``,
    ``identity_residual``, ``recovery_gap``, ``rate_exponent``,
    ``outlier_distance``). ``z_index`` refers to the report's z-point list;
    it is ``-1`` for records not attached to a point. Residuals and
    distances that can fall below the float range are kept as ``mpf``.
    """

    claim: str
    quantity: str
    n: int
    j: int
    k: int
    z_index: int
    z: complex | None
    measured: float
    predicted: float
    gap: float

    def key(self) -> tuple:
        return (self.claim, self.quantity, self.j, self.k, self.z_index)


@dataclass
class AsymptoticReport:
    """Records of one experiment plus their provenance.

    ``equilibrium`` identifies the equilibrium solution the predictions come
    from (method, grid size, tolerance, constants); ``z_points`` are the
    seeded evaluation points, indexed by ``Record.z_index``.
    """

    experiment_id: str
    n_list: tuple
    records: list = field(default_factory=list)
    z_points: tuple = ()
    identity_points: tuple = ()
    seed: int = 0
    equilibrium: dict = field(default_factory=dict)
    degenerate: tuple = ()

    def extend(self, records: Iterable[Record]) -> None:
        self.records.extend(records)

    def sorted_records(self) -> list:
        return sorted(self.records, key=lambda r: (r.n, r.z_index, CLAIMS.index(r.claim),
                                                   r.quantity, r.j, r.k))

    def select(self, claim: str, quantity: str | None = None, j: int | None = None,
               k: int | None = None, z_index: int | None = None, n: int | None = None) -> list:
        out = []
        for r in self.records:
            if r.claim != claim or (quantity is not None and r.quantity != quantity):
                continue
            if (j is not None and r.j != j) or (k is not None and r.k != k):
                continue
            if (z_index is not None and r.z_index != z_index) or (n is not None and r.n != n):
                continue
            out.append(r)
        return sorted(out, key=lambda r: (r.n, r.z_index))

    def series(self, claim: str, quantity: str, j: int = -1, k: int = -1,
               z_index: int = -1) -> tuple[list, list]:
        rs = self.select(claim, quantity, j, k, z_index)
        return [r.n for r in rs], [r.gap for r in rs]


def sample_z_points(sys: NikishinSystem, pert: RationalPerturbation | None, count: int,
                    seed: int, annulus: tuple = (1.2, 2.5), margin: float = 0.25) -> list:
    """Seeded points in an annulus around the hull of the intervals.

    Radii are relative to the half-length of the hull and measured from its
    midpoint. Points within ``margin`` (absolute) of an interval or of a
    zero of ``T`` are rejected and redrawn.
    """
    lo = min(float(iv.a) for iv in sys.intervals)
    hi = max(float(iv.b) for iv in sys.intervals)
    c, h = (lo + hi) / 2, (hi - lo) / 2
    poles = [complex(z) for z, _ in pert.zeros] if pert is not None else []
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < count:
        r = h * rng.uniform(*annulus)
        t = rng.uniform(0, 2 * math.pi)
        z = complex(c + r * math.cos(t), r * math.sin(t))
        if any(_float_distance(z, float(iv.a), float(iv.b)) < margin for iv in sys.intervals):
            continue
        if any(abs(z - p) < margin for p in poles):
            continue
        pts.append(z)
    return pts


def _float_distance(z: complex, a: float, b: float) -> float:
    return math.hypot(max(a - z.real, z.real - b, 0.0), z.imag)


def _mp(z: complex):
    return mpmath.mpc(z.real, z.imag)


def _log_over(x, n: int) -> float:
    x = abs(x)
    return float(mpmath.log(x)) / n if x != 0 else -math.inf


def _guard(sys, pert, z: complex, levels, near_Z: bool, margin: float = 1e-9):
    for j in levels:
        if 1 <= j <= sys.m:
            iv = sys.interval(j)
            if _float_distance(z, float(iv.a), float(iv.b)) < margin * float(iv.length):
                raise ExcludedPointError(f"z={z} lies on Delta_{j}")
    if near_Z and pert is not None:
        for p, _ in pert.zeros:
            if abs(z - complex(p)) < margin:
                raise ExcludedPointError(f"z={z} is a zero of T")


def trend_verdict(gaps: Sequence[float], floor: float = 0.0) -> bool:
    """Absolute gap nonincreasing over the trailing half (at least two values)."""
    g = [max(abs(x), floor) for x in gaps]
    if len(g) < 2:
        return True
    tail = g[len(g) // 2:] if len(g) >= 4 else g
    if len(tail) < 2:
        tail = g[-2:]
    return all(b <= a for a, b in zip(tail, tail[1:]))


def zero_distribution_check(facts: Mapping[int, FormFactorization], eq: EquilibriumSolution,
                            j: int) -> list:
    """CDF sup-distance between the zero counting measure of ``Q_{n,j}`` and ``lambda_j``."""
    out = []
    for n in sorted(facts):
        roots = [float(r) for r in facts[n].Q_roots[j - 1]]
        d = cdf_distance(DiscreteMeasure.zero_counting(roots), eq.lambdas[j - 1])
        out.append(Record("weak_Qnj", "cdf_distance", n, j, -1, -1, None, d, 0.0, d))
    return out


def norm_limit_check(facts: Mapping[int, FormFactorization], sols: Mapping[int, HPSolution],
                     sys: NikishinSystem, eq: EquilibriumSolution, j: int) -> list:
    """``log(weighted norm) / 2n`` against ``-sum_{k >= j} omega_k``."""
    predicted = -float(partial_sums(eq)[j - 1])
    out = []
    for n in sorted(facts):
        with mpmath.workprec(sols[n].precision):
            measured = _log_over(weighted_norm(sys, facts[n], sols[n], j), 2 * n)
        out.append(Record("limit_nesimo", "norm_exponent", n, j, -1, -1, None,
                          measured, predicted, measured - predicted))
    return out


def form_asymptotics_check(sols: Mapping[int, HPSolution], sys: NikishinSystem,
                           pert: RationalPerturbation, eq: EquilibriumSolution, j: int,
                           z_points: Sequence[complex]) -> list:
    """``log|A_{n,j}(z)| / n`` against the predicted form field."""
    m = sys.m
    levels = [1] if j == 0 else ([m] if j == m else [j, j + 1])
    predicted = []
    for z in z_points:
        _guard(sys, pert, z, levels, near_Z=j in (0, m))
        predicted.append(float(form_exponent(eq, j, z)))
    out = []
    for n in sorted(sols):
        with mpmath.workprec(sols[n].precision):
            for i, z in enumerate(z_points):
                measured = _log_over(eval_form(sys, pert, sols[n], j, _mp(z)), n)
                out.append(Record("limit_nrooth_Anj", "form_exponent", n, j, -1, i, z,
                                  measured, predicted[i], measured - predicted[i]))
    return out


def identity_residuals(sol: HPSolution, sys: NikishinSystem, pert: RationalPerturbation,
                       j: int, z) -> tuple:
    """Residual of the transform identity linking the forms to ``a_{n,j}``.

    For ``j >= 1``::

        A_j + sum_{k=j+1}^{m-1} (-1)^(k-j) s_{k,j+1} A_k = (-1)^j (a_j - a_m s_{m,j+1})

    and for ``j = 0``::

        A_0 + sum_{k=1}^{m-1} (-1)^k s_{k,1} A_k
            = a_0 + sum_{k=1}^m (-1)^k a_k r_k - a_m s_{m,1}

    Returns ``(|lhs - rhs|, scale)`` where ``scale`` sums the magnitudes of
    all terms on both sides.
    """
    m = sys.m
    with mpmath.workprec(sol.precision):
        z = mpmath.mpmathify(z)
        A, sA = form_with_scale(sys, pert, sol, j, z)
        lhs, scale = A, sA
        for k in range(j + 1, m):
            s = eval_nested_transform(sys, k, j + 1, z)
            Ak, sk = form_with_scale(sys, pert, sol, k, z)
            lhs += (-1) ** (k - j) * s * Ak
            scale += abs(s) * sk
        am = sol.eval_poly(m, z)
        tail = am * eval_nested_transform(sys, m, j + 1, z)
        if j == 0:
            head = sol.eval_poly(0, z)
            scale += abs(head) + abs(tail)
            for k in range(1, m + 1):
                if not pert.is_zero(k):
                    t = sol.eval_poly(k, z) * eval_fraction(pert, k, z)
                    head += (-1) ** k * t
                    scale += abs(t)
            rhs = head - tail
        else:
            aj = sol.eval_poly(j, z)
            rhs = (-1) ** j * (aj - tail)
            scale += abs(aj) + abs(tail)
        return abs(lhs - rhs), scale


def ratio_and_recovery_check(sols: Mapping[int, HPSolution], sys: NikishinSystem,
                             pert: RationalPerturbation, eq: EquilibriumSolution,
                             z_points: Sequence[complex],
                             identity_points: Sequence[complex] = ()) -> list:
    """Ratio asymptotics, the identity stack and the recovery limits.

    Records with quantity ``ratio_exponent`` compare
    ``log|A_{n,j}/A_{n,k}| / n`` to the predicted ratio field for all
    ``j < k`` at the points where it is defined. ``identity_residual``
    records hold the relative residual of :func:`identity_residuals` at
    ``identity_points`` (``z_index`` counts into that list). ``recovery_gap``
    records hold ``|R_{n,j}(z) - s_{m-1,j+1}(z)| / |s_{m-1,j+1}(z)|`` for the
    recovery ratios ``R_{n,j}`` (``j = 0`` and ``1 <= j <= m-2``).
    """
    m = sys.m
    pairs = []
    for j in range(m):
        for k in range(j + 1, m + 1):
            for i, z in enumerate(z_points):
                try:
                    _guard(sys, pert, z, {j, j + 1, k, k + 1}, near_Z=(j == 0 or k == m))
                except ExcludedPointError:
                    continue
                pairs.append((j, k, i, z, float(ratio_exponent(eq, j, k, z))))
    out = []
    for n in sorted(sols):
        sol = sols[n]
        with mpmath.workprec(sol.precision):
            cache = {}

            def form(j, i, z):
                if (j, i) not in cache:
                    cache[(j, i)] = eval_form(sys, pert, sol, j, _mp(z))
                return cache[(j, i)]

            for j, k, i, z, pred in pairs:
                measured = _log_over(form(j, i, z) / form(k, i, z), n)
                out.append(Record("ratio_Anj", "ratio_exponent", n, j, k, i, z,
                                  measured, pred, measured - pred))
            for i, z in enumerate(identity_points):
                for j in range(m):
                    res, scale = identity_residuals(sol, sys, pert, j, _mp(z))
                    rel = res / scale if scale else res
                    out.append(Record("recover", "identity_residual", n, j, -1, i, z,
                                      rel, 0.0, rel))
            if m >= 2:
                for i, z in enumerate(z_points):
                    zm = _mp(z)
                    am = sol.eval_poly(m, zm)
                    den = sol.eval_poly(m - 1, zm) - am * eval_nested_transform(sys, m, m, zm)
                    for j in [0] + list(range(1, m - 1)):
                        if j == 0:
                            num = sol.eval_poly(0, zm) - am * eval_nested_transform(sys, m, 1, zm)
                            for kk in range(1, m + 1):
                                if not pert.is_zero(kk):
                                    num += (-1) ** kk * sol.eval_poly(kk, zm) * eval_fraction(pert, kk, zm)
                        else:
                            num = sol.eval_poly(j, zm) - am * eval_nested_transform(sys, m, j + 1, zm)
                        target = eval_nested_transform(sys, m - 1, j + 1, zm)
                        rel = abs(num / den - target) / abs(target)
                        out.append(Record("recover", "recovery_gap", n, j, -1, i, z,
                                          float(abs(num / den)), float(abs(target)), rel))
    return out


def rate_check(sols: Mapping[int, HPSolution], sys: NikishinSystem, pert: RationalPerturbation,
               eq: EquilibriumSolution, j: int, z_points: Sequence[complex]) -> list:
    """``log|a_{n,j}/a_{n,m} - target| / n`` against the rate field.

    The target is ``s_{m,j+1}`` for ``j >= 1`` (claim ``geometric_speed``)
    and ``f`` for ``j = 0`` (claim ``geometric_speed_an0``, one-sided).
    """
    m = sys.m
    if not 0 <= j < m:
        raise ValueError("rate check needs 0 <= j < m")
    claim = "geometric_speed_an0" if j == 0 else "geometric_speed"
    predicted = []
    for z in z_points:
        _guard(sys, pert, z, range(j + 1, m + 1), near_Z=(j == 0))
        predicted.append(float(rate_exponent(eq, z)))
    out = []
    for n in sorted(sols):
        sol = sols[n]
        with mpmath.workprec(sol.precision):
            for i, z in enumerate(z_points):
                zm = _mp(z)
                target = eval_f(sys, pert, zm) if j == 0 else eval_nested_transform(sys, m, j + 1, zm)
                err = sol.eval_poly(j, zm) / sol.eval_poly(m, zm) - target
                measured = _log_over(err, n)
                out.append(Record(claim, "rate_exponent", n, j, -1, i, z,
                                  measured, predicted[i], measured - predicted[i]))
    return out


def pole_attraction_check(facts: Mapping[int, FormFactorization],
                          pert: RationalPerturbation) -> list:
    """Matching distance between the outlier roots of ``a_{n,m}`` and the zeros of ``T``.

    Poles are repeated by multiplicity and matched to outliers by an optimal
    assignment; the record holds the largest matched distance (``inf`` when
    the counts differ, ``0`` when ``D = 0``).
    """
    poles = [complex(p) for p in pert.root_list()]
    out = []
    for n in sorted(facts):
        outl = [complex(r) for r in facts[n].outlier_roots]
        if not poles and not outl:
            d = 0.0
        elif len(poles) != len(outl):
            d = math.inf
        else:
            with mpmath.workprec(facts[n].precision):
                dist = [[abs(r - mpmath.mpmathify(p)) for p in pert.root_list()]
                        for r in facts[n].outlier_roots]
                # assignment on float64 costs, distances kept at full precision
                rows, cols = linear_sum_assignment(np.array(dist, dtype=float))
                d = max(dist[r][c] for r, c in zip(rows, cols))
        out.append(Record("pole_attraction", "outlier_distance", n, -1, -1, -1, None, d, 0.0, d))
    return out


def summarize(report: AsymptoticReport, slack: float = 0.05, floors: Mapping | None = None) -> list:
    """One row per (claim, quantity, j, k, z_index) with final gap and verdicts.

    ``trend`` is the nonincreasing verdict for limit claims. For one-sided
    claims ``bound`` states whether ``gap <= log(1 + slack)`` at the largest
    index. ``floors`` maps a quantity to the value below which gaps are
    considered at the rounding level.
    """
    floors = dict(floors or {})
    groups = {}
    for r in report.records:
        groups.setdefault(r.key(), []).append(r)
    rows = []
    for key in sorted(groups, key=lambda t: (CLAIMS.index(t[0]), t[1], t[2], t[3], t[4])):
        rs = sorted(groups[key], key=lambda r: r.n)
        last = rs[-1]
        claim, quantity = key[0], key[1]
        if claim in ONE_SIDED:
            trend, bound = "na", ("pass" if last.gap <= math.log1p(slack) else "fail")
        elif quantity == "identity_residual":
            trend, bound = "na", "na"
        else:
            trend = "nonincreasing" if trend_verdict([r.gap for r in rs], floors.get(quantity, 0.0)) \
                else "increasing"
            bound = "na"
        rows.append({"claim": claim, "quantity": quantity, "j": key[2], "k": key[3],
                     "z_index": key[4], "n_last": last.n, "measured_last": last.measured,
                     "predicted_last": last.predicted, "gap_last": last.gap,
                     "max_abs_gap": max(abs(r.gap) for r in rs), "trend": trend, "bound": bound})
    return rows
