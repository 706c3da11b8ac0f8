"""Forms ``A_{n,j}``, their zero factorization and the functions ``H_{n,j}``.

``Q_{n,m}`` collects the roots of ``a_{n,m}`` on ``Delta_m``; the remaining
roots form the outlier factor ``T_n``. For ``j < m`` the roots of
``A_{n,j}`` on ``Delta_j`` are found by sign changes of the real-valued
restriction, bracketed by bisection and polished by the Illinois variant of
regula falsi. Division by ``Q_{n,j}`` on ``Delta_j`` is never done pointwise:
``A_{n,j}/Q_{n,j}`` is evaluated through its Cauchy-integral representation
over ``Delta_{j+1}``, which is analytic there.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath

from .hp_solver import HPSolution, QuadratureDepthError
from .measures import NearSupportError, distance_to_interval, mp_value
from .nikishin import NikishinSystem, RationalPerturbation, eval_fraction, eval_nested_transform
from .polynomials import poly_eval, poly_from_roots, poly_mul, poly_roots

__all__ = [
    "FormFactorization",
    "LocalizationError",
    "ClassificationError",
    "eval_form",
    "form_with_scale",
    "eval_form_integral",
    "poly_roots",
    "factorize",
    "eval_Q",
    "eval_H",
    "eval_H_integral",
    "weighted_norm",
]


class LocalizationError(RuntimeError):
    """Root count of a form on its interval differs from ``n - D``."""

    def __init__(self, message, found=None, expected=None):
        super().__init__(message)
        self.found = found
        self.expected = expected


class ClassificationError(RuntimeError):
    """A root of ``a_{n,m}`` sits too close to an endpoint of ``Delta_m`` to classify."""


def _real(z):
    z = mpmath.mpmathify(z)
    if isinstance(z, mpmath.mpc) and z.imag == 0:
        return z.real
    return z


def form_with_scale(sys: NikishinSystem, pert: RationalPerturbation, sol: HPSolution, j: int, z):
    """``A_{n,j}(z)`` together with the sum of the magnitudes of its terms.

    The second value measures cancellation and serves as the scale of
    identity residuals.
    """
    m = sys.m
    if not 0 <= j <= m:
        raise IndexError(f"form index {j} out of range for m={m}")
    with mpmath.workprec(sol.precision):
        z = _real(z)
        a = [poly_eval(c, z) for c in sol.coeffs]
        if j == m:
            v = (-1) ** m * a[m]
            return v, abs(v)
        terms = [(-1) ** j * a[j]] if j > 0 else [a[0]]
        for k in range(j + 1 if j > 0 else 1, m + 1):
            s = eval_nested_transform(sys, j + 1 if j > 0 else 1, k, z)
            if j == 0 and not pert.is_zero(k):
                _check_pole(pert, z)
                s = s + eval_fraction(pert, k, z)
            terms.append((-1) ** k * a[k] * s)
        return mpmath.fsum(terms), mpmath.fsum(abs(t) for t in terms)


def _check_pole(pert, z):
    for root, _ in pert.zeros:
        if abs(z - root) < mpmath.mpf(2) ** (-pert.precision // 4) * max(1, abs(root)):
            raise NearSupportError(f"z={z} is at a pole of the perturbation")


def eval_form(sys: NikishinSystem, pert: RationalPerturbation, sol: HPSolution, j: int, z):
    """``A_{n,j}(z)``: real for real ``z``.

    ``j = 0`` is the perturbed first form, ``1 <= j < m`` the intermediate
    forms and ``j = m`` gives ``(-1)**m a_{n,m}``.
    """
    return form_with_scale(sys, pert, sol, j, z)[0]


@dataclass(frozen=True)
class FormFactorization:
    """Zero factorization of the forms of one index ``n``.

    ``Q_roots[j-1]`` are the roots of ``Q_{n,j}`` (increasing), ``Q[j-1]`` its
    monic ascending coefficients. ``classes`` labels each root of
    ``a_{n,m}`` as ``"delta"`` or ``"outlier"``; ``pole_targets`` pairs every
    outlier with the nearest zero of ``T``.
    """

    n: int
    D: int
    Q_roots: tuple
    Q: tuple
    T_n: tuple
    outlier_roots: tuple
    classes: tuple
    pole_targets: tuple
    T: tuple
    precision: int
    factorization_error: object
    gap_sign_changes: tuple = ()

    @property
    def m(self) -> int:
        return len(self.Q)

    def to_json(self) -> dict:
        digits = int(self.precision * 0.30103) + 2
        s = lambda x: mpmath.nstr(x, digits, min_fixed=1, max_fixed=0)
        c = lambda z: ([s(mpmath.re(z)), s(mpmath.im(z))])
        return {
            "n": self.n, "D": self.D, "precision": self.precision,
            "Q_roots": [[s(r) for r in rs] for rs in self.Q_roots],
            "T_n": [s(x) for x in self.T_n],
            "roots_a_nm": [{"root": c(r), "class": lab} for r, lab in self.classes],
            "outliers": [{"root": c(r), "pole_target": c(p)}
                         for r, p in zip(self.outlier_roots, self.pole_targets)],
            "factorization_error": s(self.factorization_error),
            "gap_sign_changes": list(self.gap_sign_changes),
        }


def eval_Q(fact: FormFactorization, j: int, z):
    """``Q_{n,j}(z)`` as a product of root factors; ``Q_{n,0} = Q_{n,m+1} = 1``."""
    if j == 0 or j == fact.m + 1:
        return mpmath.mpf(1)
    return mpmath.fprod(z - r for r in fact.Q_roots[j - 1])


def _sample_points(a, b, count):
    """Endpoints plus ``count`` cosine-spaced interior points, increasing."""
    mid, half = (a + b) / 2, (b - a) / 2
    pts = [mid - half * mpmath.cos((i - mpmath.mpf(1) / 2) * mpmath.pi / count)
           for i in range(1, count + 1)]
    return [a] + pts + [b]


def _illinois(fn, lo, hi, flo, fhi, width_stop, max_iter=400):
    """Bracketed root polish: bisection to ``2**-30`` of the bracket, then Illinois."""
    start = hi - lo
    while hi - lo > start * mpmath.mpf(2) ** -30:
        mid = (lo + hi) / 2
        fm = fn(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    side = 0
    for _ in range(max_iter):
        x = (lo * fhi - hi * flo) / (fhi - flo)
        if not lo < x < hi:
            x = (lo + hi) / 2
        fx = fn(x)
        if fx == 0 or hi - lo < width_stop:
            return x
        if (fx < 0) == (flo < 0):
            lo, flo = x, fx
            if side == -1:
                fhi /= 2
            side = -1
        else:
            hi, fhi = x, fx
            if side == 1:
                flo /= 2
            side = 1
    return (lo + hi) / 2


def _brackets(fn, pts):
    vals = [fn(x) for x in pts]
    out = []
    for i in range(len(pts) - 1):
        if vals[i] == 0:
            out.append((pts[i], pts[i], vals[i], vals[i]))
        elif vals[i] * vals[i + 1] < 0:
            out.append((pts[i], pts[i + 1], vals[i], vals[i + 1]))
    if vals[-1] == 0:
        out.append((pts[-1], pts[-1], vals[-1], vals[-1]))
    return out


def _roots_on_interval(fn, a, b, expected, density, precision, doublings=3):
    count = max(density, 8)
    for _ in range(doublings + 1):
        brackets = _brackets(fn, _sample_points(a, b, count))
        if len(brackets) == expected:
            break
        count *= 2
    if len(brackets) != expected:
        raise LocalizationError(
            f"found {len(brackets)} sign changes on [{mpmath.nstr(a, 6)}, {mpmath.nstr(b, 6)}], "
            f"expected {expected} (sampling up to {count // 2} points)",
            found=len(brackets), expected=expected)
    stop = (b - a) * mpmath.mpf(2) ** (-(precision - 24))
    return [lo if lo == hi else _illinois(fn, lo, hi, flo, fhi, stop)
            for lo, hi, flo, fhi in brackets]


def factorize(sys: NikishinSystem, pert: RationalPerturbation, sol: HPSolution,
              density: int | None = None, band=None) -> FormFactorization:
    """Locate the zeros of ``a_{n,m}`` and of ``A_{n,j}`` on ``Delta_j``.

    Parameters
    ----------
    density : int, optional
        Initial number of sampling points per interval (default ``8n``).
    band : optional
        Relative width of the classification band around the endpoints of
        ``Delta_m`` (default ``1e-10``).
    """
    if sol.degenerate:
        raise ValueError(f"index n={sol.n} is degenerate; factorization undefined")
    n, m, D = sol.n, sys.m, pert.D
    prec = sol.precision
    density = 8 * n if density is None else int(density)
    with mpmath.workprec(prec):
        band = mpmath.mpf("1e-10") if band is None else mpmath.mpf(band)
        am = sol.coeffs[m]
        iv = sys.interval(m)
        a, b = iv.endpoints()
        width = band * (b - a)
        roots = poly_roots(am, prec).roots
        inside, outliers, classes = [], [], []
        for r in roots:
            dist = distance_to_interval(r, iv)
            near_end = min(abs(r - a), abs(r - b)) <= width
            if near_end:
                raise ClassificationError(
                    f"root {mpmath.nstr(r, 12)} of a_{{n,m}} is within the band "
                    f"{mpmath.nstr(width, 3)} of an endpoint of {iv}")
            if dist <= width:
                inside.append(mpmath.re(r))
                classes.append((mpmath.re(r), "delta"))
            else:
                outliers.append(r)
                classes.append((r, "outlier"))
        if len(inside) != n - D:
            raise LocalizationError(
                f"a_{{n,m}} has {len(inside)} roots on {iv}, expected n - D = {n - D}",
                found=len(inside), expected=n - D)
        inside.sort()
        Q_roots = [None] * m
        Q_roots[m - 1] = tuple(inside)
        gaps = []
        for j in range(1, m):
            ivj = sys.interval(j)
            lo, hi = ivj.endpoints()
            fn = lambda x, j=j: eval_form(sys, pert, sol, j, x)
            Q_roots[j - 1] = tuple(sorted(_roots_on_interval(fn, lo, hi, n - D, density, prec)))
            gaps.append(_gap_sign_changes(sys, fn, j, density))
        Q = tuple(tuple(poly_from_roots(rs)) for rs in Q_roots)
        T_n = tuple(mpmath.re(c) for c in poly_from_roots(outliers))
        prod = poly_mul(list(Q[m - 1]), list(T_n))
        size = max(abs(c) for c in am)
        err = max(abs(x - y) for x, y in zip(prod, am)) / size
        targets = []
        for r in outliers:
            targets.append(min((z for z, _ in pert.zeros), key=lambda z: abs(z - r))
                           if pert.zeros else mpmath.nan)
        T = tuple(mp_value(c) for c in pert.T)
        return FormFactorization(n=n, D=D, Q_roots=tuple(Q_roots), Q=Q, T_n=T_n,
                                 outlier_roots=tuple(outliers), classes=tuple(classes),
                                 pole_targets=tuple(targets), T=T, precision=prec,
                                 factorization_error=err, gap_sign_changes=tuple(gaps))


def _gap_sign_changes(sys, fn, j, density):
    """Sign changes of ``A_{n,j}`` on the open gap between ``Delta_j`` and ``Delta_{j+1}``."""
    I, J = sys.interval(j), sys.interval(j + 1)
    lo, hi = (I.b, J.a) if I.b < J.a else (J.b, I.a)
    lo, hi = mp_value(lo), mp_value(hi)
    pad = (hi - lo) * mpmath.mpf(10) ** -6 + mp_value(J.length) * mpmath.mpf(10) ** -6
    pts = _sample_points(lo + pad, hi - pad, density)
    return len(_brackets(fn, pts))


def _level_integrand(sys, pert, sol, fact, level):
    """Values of ``Q_l * (T if l <= 1) * A_{n,l} / Q_{n,l-1}`` at the nodes of ``Delta_l``.

    This is ``Q_l**2 H_{n,l} / (Q_{l-1} Q_{l+1})`` with the factor
    ``Q_{l+1}`` cancelled analytically.
    """
    rule = sys.rule(level)
    out = []
    for x in rule.nodes:
        v = eval_form(sys, pert, sol, level, x) * eval_Q(fact, level, x) / eval_Q(fact, level - 1, x)
        if level <= 1:
            v *= poly_eval(fact.T, x)
        out.append(v)
    return rule, out


def eval_form_integral(sys: NikishinSystem, pert: RationalPerturbation, sol: HPSolution,
                       fact: FormFactorization | None, j: int, z):
    """Second evaluator of ``A_{n,j}`` through the Cauchy-integral representations.

    ``j = 0``: ``T(z) A_{n,0}(z) = int A_{n,1} T / (z - x) dsigma_1``.
    ``1 <= j < m``: ``A_{n,j}/Q_{n,j}(z) = int A_{n,j+1} / (z - x) dsigma_{j+1}/Q_{n,j}``.
    """
    m = sys.m
    if not 0 <= j < m:
        raise IndexError("the integral representation covers 0 <= j < m")
    with mpmath.workprec(sol.precision):
        z = _real(z)
        rule = sys.rule(j + 1)
        vals = []
        for x in rule.nodes:
            v = eval_form(sys, pert, sol, j + 1, x)
            v = v * poly_eval(_T_coeffs(pert), x) if j == 0 else v / eval_Q(fact, j, x)
            vals.append(v)
        integral = mpmath.fsum(w * v / (z - x) for x, w, v in zip(rule.nodes, rule.weights, vals))
        if j == 0:
            return integral / poly_eval(_T_coeffs(pert), z)
        return integral * eval_Q(fact, j, z)


def _T_coeffs(pert):
    return [mp_value(c) for c in pert.T]


def eval_H(sys: NikishinSystem, pert: RationalPerturbation, fact: FormFactorization,
           sol: HPSolution, j: int, z):
    """``H_{n,j}(z) = Q_{n,j+1} [T] A_{n,j} / Q_{n,j}``; the factor ``T`` enters for ``j = 0, 1``.

    On ``Delta_j`` the quotient ``A_{n,j}/Q_{n,j}`` is taken from its
    integral representation (``j < m``) or equals ``(-1)**m T_n`` (``j = m``),
    so no pointwise division by ``Q_{n,j}`` occurs.
    """
    m = sys.m
    if not 0 <= j <= m:
        raise IndexError(f"H index {j} out of range for m={m}")
    with mpmath.workprec(sol.precision):
        z = _real(z)
        if j == m:
            ratio = (-1) ** m * poly_eval(fact.T_n, z)
        elif j == 0:
            ratio = eval_form(sys, pert, sol, 0, z)
        elif distance_to_interval(z, sys.interval(j)) == 0:
            ratio = _ratio_integral(sys, pert, sol, fact, j, z)
        else:
            ratio = eval_form(sys, pert, sol, j, z) / eval_Q(fact, j, z)
        value = eval_Q(fact, j + 1, z) * ratio
        if j <= 1:
            value *= poly_eval(fact.T, z)
        return value


def _ratio_integral(sys, pert, sol, fact, j, z):
    """``A_{n,j}/Q_{n,j}(z)`` from the integral over ``Delta_{j+1}``."""
    rule = sys.rule(j + 1)
    return mpmath.fsum(w * eval_form(sys, pert, sol, j + 1, x) / eval_Q(fact, j, x) / (z - x)
                       for x, w in zip(rule.nodes, rule.weights))


def eval_H_integral(sys: NikishinSystem, pert: RationalPerturbation, fact: FormFactorization,
                    sol: HPSolution, j: int, z):
    """Right-hand side of the ``H`` recursion, ``0 <= j < m``:

    ``[T(z) if j == 1] * int Q_{j+1}**2 H_{n,j+1} / (z - x) dsigma_{j+1} / (Q_j Q_{j+2})``.
    """
    m = sys.m
    if not 0 <= j < m:
        raise IndexError("the H recursion covers 0 <= j < m")
    with mpmath.workprec(sol.precision):
        z = _real(z)
        rule, vals = _level_integrand(sys, pert, sol, fact, j + 1)
        value = mpmath.fsum(w * v / (z - x) for x, w, v in zip(rule.nodes, rule.weights, vals))
        if j == 1:
            value *= poly_eval(fact.T, z)
        return value


def weighted_norm(sys: NikishinSystem, fact: FormFactorization, sol: HPSolution, j: int):
    """``|int Q_{n,j}**2 H_{n,j} dsigma_j / (Q_{n,j-1} Q_{n,j+1})|`` by quadrature.

    The ``2n``-th root is left to the caller.
    """
    m = sys.m
    if not 1 <= j <= m:
        raise IndexError("weighted norms exist for 1 <= j <= m")
    rule = sys.rule(j)
    if 2 * sol.n > rule.exact_degree:
        raise QuadratureDepthError(
            f"integrand of degree {2 * sol.n} exceeds exactness {rule.exact_degree} on Delta_{j}")
    with mpmath.workprec(sol.precision):
        # forms of index >= 1 do not involve the fractions r_k
        rule, vals = _level_integrand(sys, None, sol, fact, j)
        return abs(mpmath.fsum(w * v for w, v in zip(rule.weights, vals)))
