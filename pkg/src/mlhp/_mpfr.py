"""Exact conversions between mpmath ``mpf`` and gmpy2 ``mpfr``.

Hot loops (elimination, Gauss-rule Newton sweeps) run on gmpy2 numbers; the
rest of the package speaks mpmath. Conversions go through the binary
mantissa/exponent pair, so nothing is rounded beyond the target precision.
"""

from __future__ import annotations

import gmpy2
import mpmath
from mpmath.libmp import from_man_exp


def to_mpfr(x, prec: int):
    if not isinstance(x, mpmath.mpf):
        # mpf() rounds to the ambient precision; only convert foreign types
        with mpmath.workprec(prec):
            x = mpmath.mpf(x)
    if x == 0:
        return gmpy2.mpfr(0, prec)
    sign, man, exp, bc = x._mpf_
    man = -int(man) if sign else int(man)
    return gmpy2.mul_2exp(gmpy2.mpfr(man, max(prec, int(bc))), int(exp))


def from_mpfr(y):
    if not gmpy2.is_finite(y):
        raise ValueError(f"non-finite value {y}")
    if y == 0:
        return mpmath.mpf(0)
    man, exp = y.as_mantissa_exp()
    # exact: mpf((man, exp)) would round to the ambient precision
    return mpmath.mp.make_mpf(from_man_exp(int(man), int(exp)))


def context(prec: int):
    """gmpy2 local context with round-to-nearest at ``prec`` bits."""
    return gmpy2.context(gmpy2.get_context(), precision=prec)
