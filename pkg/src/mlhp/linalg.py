"""Kernel extraction for wide real systems at arbitrary precision.

Gaussian elimination with full pivoting on an equilibrated copy of the
matrix. The rank is the number of pivots whose magnitude exceeds
``rtol`` times the first (largest) pivot.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import gmpy2
import mpmath

from . import _mpfr

__all__ = ["KernelResult", "kernel"]


@dataclass(frozen=True)
class KernelResult:
    rank: int
    basis: tuple          # tuple of mpf vectors spanning the numerical kernel
    pivots: tuple         # pivot magnitudes, scaled system, in elimination order
    min_pivot_ratio: object

    @property
    def nullity(self) -> int:
        return len(self.basis)


def kernel(rows: Sequence[Sequence], prec: int, rtol=None) -> KernelResult:
    """Numerical kernel of the matrix ``rows`` (list of equal-length rows).

    Rows and columns are scaled to unit max-norm before elimination; basis
    vectors are returned in the original (unscaled) variables, each with the
    free variable set to one.
    """
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    if rtol is None:
        rtol = mpmath.mpf(2) ** (-prec // 2)
    with _mpfr.context(prec):
        A = [[_mpfr.to_mpfr(v, prec) for v in r] for r in rows]
        zero = gmpy2.mpfr(0)
        col_scale = []
        for c in range(n_cols):
            m = max((abs(A[r][c]) for r in range(n_rows)), default=zero)
            col_scale.append(m if m != 0 else gmpy2.mpfr(1))
        for r in range(n_rows):
            row = A[r]
            for c in range(n_cols):
                row[c] = row[c] / col_scale[c]
            m = max(abs(v) for v in row)
            if m != 0:
                A[r] = [v / m for v in row]
        grtol = _mpfr.to_mpfr(rtol, prec)
        col_perm = list(range(n_cols))
        pivots = []
        rank = 0
        first = None
        for k in range(min(n_rows, n_cols)):
            best, br, bc = zero, -1, -1
            for r in range(k, n_rows):
                row = A[r]
                for c in range(k, n_cols):
                    v = abs(row[c])
                    if v > best:
                        best, br, bc = v, r, c
            if first is None:
                first = best
            if best == 0 or best <= grtol * first:
                break
            A[k], A[br] = A[br], A[k]
            if bc != k:
                for row in A:
                    row[k], row[bc] = row[bc], row[k]
                col_perm[k], col_perm[bc] = col_perm[bc], col_perm[k]
            pivots.append(best)
            prow = A[k]
            piv = prow[k]
            for r in range(k + 1, n_rows):
                row = A[r]
                f = row[k] / piv
                if f == 0:
                    continue
                row[k] = zero
                for c in range(k + 1, n_cols):
                    row[c] -= f * prow[c]
            rank += 1
        basis = []
        for free in range(rank, n_cols):
            x = [zero] * n_cols
            x[free] = gmpy2.mpfr(1)
            for i in range(rank - 1, -1, -1):
                row = A[i]
                acc = zero
                for c in range(i + 1, n_cols):
                    if x[c] != 0:
                        acc += row[c] * x[c]
                x[i] = -acc / row[i]
            vec = [zero] * n_cols
            for pos, orig in enumerate(col_perm):
                vec[orig] = x[pos] / col_scale[orig]
            basis.append(tuple(_mpfr.from_mpfr(v) for v in vec))
        ratio = (pivots[-1] / pivots[0]) if pivots else zero
        return KernelResult(rank=rank, basis=tuple(basis),
                            pivots=tuple(_mpfr.from_mpfr(p) for p in pivots),
                            min_pivot_ratio=_mpfr.from_mpfr(ratio))
