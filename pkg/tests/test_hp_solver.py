import json

import mpmath
import pytest

from mlhp.forms import eval_form
from mlhp.hp_solver import (HPSolution, QuadratureDepthError, build_system, laurent_of_fraction,
                            laurent_of_transform, solve_hp, verify_orthogonality)
from mlhp.nikishin import NikishinSystem, build_perturbation

from conftest import chebyshev, monic_chebyshev, monic_legendre, uniform


def test_laurent_of_transform_holds_moments(legendre_system):
    s = laurent_of_transform(legendre_system, 1, 1, 3)
    assert s.top_power == -1 and s.bottom_power == -3
    with mpmath.workprec(512):
        assert abs(s.coefficient(-1) - 2) < 1e-100
        assert abs(s.coefficient(-2)) < 1e-100
        assert abs(s.coefficient(-3) - mpmath.mpf(2) / 3) < 1e-100
    assert s.coefficient(3) == 0
    with pytest.raises(IndexError):
        s.coefficient(-4)


def test_laurent_depth_limited_by_quadrature(legendre_system):
    with pytest.raises(QuadratureDepthError):
        laurent_of_transform(legendre_system, 1, 1, 200)


@pytest.mark.parametrize("num,den,expect", [((1,), (-5, 1), [1, 5, 25]),
                                            ((0, 1), (-2, 0, 1), [1, 0, 2]),
                                            ((3,), (0, 0, 1), [0, 3, 0])])
def test_laurent_of_fraction_by_long_division(num, den, expect):
    pert = build_perturbation([(num, den)], precision=128)
    s = laurent_of_fraction(pert, 1, 3)
    assert [s.coefficient(-1 - i) for i in range(3)] == expect


def test_first_index_single_level(legendre_system, zero_m1):
    sol = solve_hp(legendre_system, zero_m1, 1)
    with mpmath.workprec(512):
        assert abs(sol.a(0)[0] - 2) < 1e-100
        assert abs(sol.a(1)[0]) < 1e-100 and sol.a(1)[1] == 1


@pytest.mark.parametrize("n", [2, 5, 9, 16])
def test_single_level_gives_monic_legendre(legendre_system, zero_m1, n):
    sol = solve_hp(legendre_system, zero_m1, n)
    exact = monic_legendre(n)
    with mpmath.workprec(512):
        err = max(abs(c - mpmath.mpf(e.numerator) / e.denominator) for c, e in zip(sol.a(1), exact))
    assert err < 1e-30
    assert sol.nullity == 1 and not sol.degenerate


@pytest.mark.parametrize("n", [3, 8, 12])
def test_chebyshev_weight_gives_monic_chebyshev(n):
    sys = NikishinSystem([chebyshev(-1, 1)], 32, 256)
    sol = solve_hp(sys, build_perturbation([None], precision=256), n)
    exact = monic_chebyshev(n)
    with mpmath.workprec(256):
        err = max(abs(c - mpmath.mpf(e.numerator) / e.denominator) for c, e in zip(sol.a(1), exact))
    assert err < 1e-30


def test_system_shape(small_m2):
    sys, pert = small_m2
    rows = build_system(sys, pert, 5)
    assert len(rows) == 3 * 5 and all(len(r) == 3 * 5 + 1 for r in rows)


@pytest.mark.parametrize("n", [4, 6, 8, 10])
def test_two_level_solution_satisfies_order_conditions(small_m2_solutions, small_m2, n):
    sys, pert = small_m2
    sol = small_m2_solutions[0][n]
    assert sol.relative_residual < mpmath.mpf(2) ** -256
    assert len(sol.a(2)) == n + 1 and sol.a(2)[-1] == 1
    with mpmath.workprec(sol.precision):
        z = mpmath.mpf(10) ** 5
        # A_0 = O(z^{-n-1}) and A_1 = O(z^{-1}) at infinity
        assert abs(eval_form(sys, pert, sol, 0, z)) * z ** (n + 1) < 1e3 * z ** 0
        assert abs(eval_form(sys, pert, sol, 1, z)) * z < 1e3


def test_orthogonality_two_level(small_m2_solutions, small_m2):
    sys, pert = small_m2
    sols, facts = small_m2_solutions
    rep = verify_orthogonality(sys, pert, sols[8], facts[8])
    assert len(rep.by_label("T*A1")) == 8 - pert.D
    assert rep.max_relative < mpmath.mpf(2) ** -256


def test_precision_and_index_guards(legendre_system, zero_m1):
    with pytest.raises(ValueError):
        solve_hp(legendre_system, zero_m1, 0)
    with pytest.raises(ValueError):
        solve_hp(legendre_system, zero_m1, 3, precision=1024)
    with pytest.raises(ValueError):
        solve_hp(legendre_system, build_perturbation([None, None], precision=512), 3)


def test_solution_json_roundtrip(small_m2_solutions):
    sol = small_m2_solutions[0][6]
    back = HPSolution.from_json(json.loads(json.dumps(sol.to_json())))
    assert back.n == sol.n and back.nullity == sol.nullity
    with mpmath.workprec(sol.precision):
        assert max(abs(x - y) for a, b in zip(sol.coeffs, back.coeffs) for x, y in zip(a, b)) \
            < mpmath.mpf(2) ** (-sol.precision + 8)


def test_reduced_precision_solve_agrees(small_m2, small_m2_solutions):
    sys, pert = small_m2
    lo = solve_hp(sys, pert, 6, precision=256)
    hi = small_m2_solutions[0][6]
    assert lo.precision == 256
    with mpmath.workprec(256):
        assert max(abs(x - y) for x, y in zip(lo.a(2), hi.a(2))) < 1e-30
