"""Shared systems and cached solves."""

from fractions import Fraction

import mpmath
import pytest

from mlhp.measures import Interval, MeasureSpec, WeightSpec
from mlhp.nikishin import NikishinSystem, build_perturbation


def uniform(a, b) -> MeasureSpec:
    return MeasureSpec(Interval(a, b), WeightSpec("uniform"))


def chebyshev(a, b) -> MeasureSpec:
    return MeasureSpec(Interval(a, b), WeightSpec("chebyshev"))


def monic_recurrence(n: int, b) -> list:
    """Exact ascending coefficients of ``p_{k+1} = x p_k - b(k) p_{k-1}``."""
    prev, cur = [Fraction(0)], [Fraction(1)]
    for k in range(n):
        shifted = [Fraction(0)] + cur
        back = [b(k) * c for c in prev] + [Fraction(0)] * (len(shifted) - len(prev))
        prev, cur = cur, [x - y for x, y in zip(shifted, back)]
    return cur


def monic_legendre(n: int) -> list:
    return monic_recurrence(n, lambda k: Fraction(k * k, 4 * k * k - 1))


def monic_chebyshev(n: int) -> list:
    return monic_recurrence(n, lambda k: Fraction(0) if k == 0 else
                            (Fraction(1, 2) if k == 1 else Fraction(1, 4)))


@pytest.fixture(scope="session")
def legendre_system():
    return NikishinSystem([uniform(-1, 1)], 64, 512)


@pytest.fixture(scope="session")
def zero_m1(legendre_system):
    return build_perturbation([None], precision=512)


@pytest.fixture(scope="session")
def small_m2():
    """Demo intervals at a size that keeps unit tests fast (n <= 10)."""
    sys = NikishinSystem([uniform(-1, 1), uniform(2, 3)], 64, 512)
    pert = build_perturbation([None, ((1,), (-5, 1))], intervals=sys.intervals, precision=512)
    return sys, pert


@pytest.fixture(scope="session")
def small_m2_solutions(small_m2):
    from mlhp.forms import factorize
    from mlhp.hp_solver import solve_hp

    sys, pert = small_m2
    sols = {n: solve_hp(sys, pert, n) for n in (4, 6, 8, 10)}
    facts = {n: factorize(sys, pert, s) for n, s in sols.items()}
    return sols, facts


# filled by test_acceptance.py, printed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture(autouse=True)
def _reset_mp():
    yield
    mpmath.mp.prec = 53
