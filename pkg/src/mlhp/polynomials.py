"""Dense polynomial helpers.

Coefficients are stored in ascending order: ``p[k]`` multiplies ``x**k``.
The helpers are generic over the scalar type, so the same code runs on
:class:`fractions.Fraction` (exact gcd/lcm work), :mod:`mpmath` reals and
complexes (root finding, evaluation) and plain floats.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

__all__ = [
    "PolyRoots",
    "RootFindingError",
    "poly_trim",
    "poly_eval",
    "poly_mul",
    "poly_add",
    "poly_scale",
    "poly_derivative",
    "poly_divmod",
    "poly_gcd",
    "poly_lcm",
    "poly_monic",
    "poly_from_roots",
    "squarefree_decomposition",
    "poly_roots",
    "to_fraction",
]


class RootFindingError(RuntimeError):
    """Raised when the simultaneous iteration hits its cap.

    The best iterate is kept in :attr:`partial`.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


def to_fraction(value) -> Fraction:
    """Exact rational from an int, float, Fraction or decimal/ratio string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, float)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {value!r} to an exact rational")


def poly_trim(p: Sequence) -> list:
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def poly_eval(p: Sequence, x):
    """Horner evaluation; ``x`` may be any scalar supporting * and +."""
    acc = 0 * x
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_add(p: Sequence, q: Sequence) -> list:
    n = max(len(p), len(q))
    out = []
    for k in range(n):
        a = p[k] if k < len(p) else 0
        b = q[k] if k < len(q) else 0
        out.append(a + b)
    return poly_trim(out)


def poly_scale(p: Sequence, c) -> list:
    return [c * a for a in p]


def poly_mul(p: Sequence, q: Sequence) -> list:
    if not p or not q:
        return [0]
    out = [0 * p[0]] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return out


def poly_derivative(p: Sequence) -> list:
    if len(p) <= 1:
        return [0 * p[0]] if p else [0]
    return [k * p[k] for k in range(1, len(p))]


def poly_divmod(p: Sequence, q: Sequence):
    """Quotient and remainder of ``p / q``; intended for exact scalars."""
    p = poly_trim(p)
    q = poly_trim(q)
    if len(q) == 1 and q[0] == 0:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(p)
    lead = q[-1]
    if len(p) < len(q):
        return [0 * lead], rem
    quot = [0 * lead] * (len(p) - len(q) + 1)
    for shift in range(len(p) - len(q), -1, -1):
        coef = rem[shift + len(q) - 1] / lead
        quot[shift] = coef
        if coef != 0:
            for i, b in enumerate(q):
                rem[shift + i] = rem[shift + i] - coef * b
    rem = poly_trim(rem[: len(q) - 1] or [0 * lead])
    return quot, rem


def poly_monic(p: Sequence) -> list:
    p = poly_trim(p)
    lead = p[-1]
    return [c / lead for c in p]


def poly_gcd(p: Sequence, q: Sequence) -> list:
    """Monic gcd over the rationals (Euclid)."""
    a = poly_trim([to_fraction(c) for c in p])
    b = poly_trim([to_fraction(c) for c in q])
    while not (len(b) == 1 and b[0] == 0):
        _, r = poly_divmod(a, b)
        a, b = b, r
    if len(a) == 1 and a[0] == 0:
        return [Fraction(0)]
    return poly_monic(a)


def poly_lcm(p: Sequence, q: Sequence) -> list:
    g = poly_gcd(p, q)
    quot, rem = poly_divmod(poly_mul([to_fraction(c) for c in p],
                                     [to_fraction(c) for c in q]), g)
    assert all(c == 0 for c in rem)
    return poly_monic(quot)


def squarefree_decomposition(p: Sequence) -> list[tuple[list, int]]:
    """Yun's algorithm over Q: list of (monic squarefree factor, multiplicity)."""
    f = poly_monic([to_fraction(c) for c in p])
    if len(f) == 1:
        return []
    out = []
    df = poly_derivative(f)
    a = poly_gcd(f, df)
    b, _ = poly_divmod(f, a)
    c, _ = poly_divmod(df, a)
    d = poly_add(c, poly_scale(poly_derivative(b), -1))
    mult = 1
    while len(b) > 1:
        g = poly_gcd(b, d)
        if len(g) > 1:
            out.append((g, mult))
        b, _ = poly_divmod(b, g)
        c, _ = poly_divmod(d, g)
        d = poly_add(c, poly_scale(poly_derivative(b), -1))
        mult += 1
    return out


def poly_from_roots(roots: Sequence) -> list:
    """Monic polynomial with the given roots."""
    p = [1]
    for r in roots:
        p = poly_mul(p, [-r, 1])
    return p


@dataclass(frozen=True)
class PolyRoots:
    """Roots returned by :func:`poly_roots`.

    ``clusters`` groups indices of roots that agree within the cluster
    tolerance; a cluster of size k signals a (numerically) k-fold root.
    """

    roots: tuple
    clusters: tuple
    iterations: int
    max_correction: object = field(repr=False)

    def __iter__(self):
        return iter(self.roots)

    def __len__(self):
        return len(self.roots)


def _initial_guesses(coeffs: Sequence) -> list[complex]:
    c = np.array([complex(mpmath.mpc(a)) for a in coeffs[::-1]])
    deg = len(coeffs) - 1
    guesses = None
    if np.all(np.isfinite(c)) and c[0] != 0:
        try:
            guesses = list(np.roots(c))
        except np.linalg.LinAlgError:
            guesses = None
    if guesses is None or len(guesses) != deg or not np.all(np.isfinite(guesses)):
        # circle of radius from the Fujiwara-type bound
        lead = abs(c[0])
        radius = max(abs(c[k]) / lead for k in range(1, deg + 1)) + 1.0
        guesses = [radius * cmath.exp(2j * math.pi * (k + 0.25) / deg)
                   for k in range(deg)]
    # np.roots returns exact conjugate/real pairs; Aberth needs distinct,
    # non-real starting points to separate repeated roots
    out = []
    for k, g in enumerate(guesses):
        g = complex(g)
        jitter = 1e-7 * (1 + abs(g)) * cmath.exp(1j * (0.7 + 2.1 * k))
        out.append(g + jitter)
    return out


def poly_roots(p: Sequence, prec: int = 256, max_iter: int = 1000) -> PolyRoots:
    """All complex roots by Aberth-Ehrlich simultaneous iteration.

    Parameters
    ----------
    p : sequence
        Ascending coefficients (anything :class:`mpmath.mpc` accepts).
    prec : int
        Working precision in bits. Iteration stops once every correction is
        below ``2**(-prec/2)`` relative to the root size; tighter targets
        stall at the noise floor set by the coefficients. Roots closer than
        ``2**(-prec/8)`` are reported as one cluster.
    """
    coeffs = poly_trim(p)
    deg = len(coeffs) - 1
    if deg < 1:
        raise ValueError("polynomial must have degree >= 1")
    with mpmath.workprec(prec + 32):
        a = [mpmath.mpc(c) for c in coeffs]
        if a[-1] == 0:
            raise ValueError("leading coefficient is zero")
        da = poly_derivative(a)
        z = [mpmath.mpc(g) for g in _initial_guesses(a)]
        stop = mpmath.mpf(2) ** (-prec // 2)
        it = 0
        done = [False] * deg
        max_corr = mpmath.inf
        while it < max_iter:
            it += 1
            max_corr = mpmath.mpf(0)
            for k in range(deg):
                if done[k]:
                    continue
                zk = z[k]
                pv = poly_eval(a, zk)
                if pv == 0:
                    done[k] = True
                    continue
                ratio = poly_eval(da, zk) / pv
                s = mpmath.fsum(1 / (zk - z[i]) for i in range(deg) if i != k)
                denom = ratio - s
                if denom == 0:
                    step = mpmath.mpf(2) ** (-prec // 2) * (1 + abs(zk))
                else:
                    step = 1 / denom
                z[k] = zk - step
                rel = abs(step) / max(1, abs(z[k]))
                max_corr = max(max_corr, rel)
                if rel < stop:
                    done[k] = True
            if all(done):
                break
        if not all(done):
            # multiple roots converge only linearly; accept the iterate if the
            # corrections have reached the reduced (clustered) accuracy
            if max_corr > mpmath.mpf(2) ** (-prec // 4):
                raise RootFindingError(
                    f"Aberth iteration did not converge after {it} steps "
                    f"(max relative correction {mpmath.nstr(max_corr, 5)})",
                    partial=tuple(z))
        tol = mpmath.mpf(2) ** (-prec / 8)
        z.sort(key=lambda r: (r.real, r.imag))
        order = list(range(deg))
        clusters = []
        seen = set()
        for i in order:
            if i in seen:
                continue
            group = [j for j in order if j not in seen
                     and abs(z[j] - z[i]) <= tol * max(1, abs(z[i]))]
            seen.update(group)
            clusters.append(tuple(group))
    with mpmath.workprec(prec):
        roots = tuple(+r for r in z)
    return PolyRoots(roots=roots, clusters=tuple(clusters), iterations=it,
                     max_correction=max_corr)
