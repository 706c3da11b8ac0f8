import mpmath
import pytest

from mlhp.forms import (ClassificationError, LocalizationError, eval_form, eval_form_integral,
                        eval_H, eval_H_integral, eval_Q, factorize, weighted_norm)
from mlhp.hp_solver import solve_hp
from mlhp.measures import NearSupportError
from mlhp.nikishin import NikishinSystem, build_perturbation

from conftest import chebyshev


def test_first_single_level_form_closed_form(legendre_system, zero_m1):
    sol = solve_hp(legendre_system, zero_m1, 1)
    with mpmath.workprec(512):
        expect = 2 - 3 * mpmath.log(2)
        # 64-node Gauss error for 1/(3 - x) is of order (3 + sqrt 8)**-128
        bound = 10 * (3 + mpmath.sqrt(8)) ** -128
        assert abs(eval_form(legendre_system, zero_m1, sol, 0, 3) - expect) < bound


def test_last_form_is_signed_polynomial(small_m2_solutions, small_m2):
    sys, pert = small_m2
    sol = small_m2_solutions[0][6]
    assert eval_form(sys, pert, sol, 2, 7) == sol.eval_poly(2, 7)
    with pytest.raises(IndexError):
        eval_form(sys, pert, sol, 3, 7)


def test_form_refuses_pole(small_m2_solutions, small_m2):
    sys, pert = small_m2
    with pytest.raises(NearSupportError):
        eval_form(sys, pert, small_m2_solutions[0][6], 0, 5)


@pytest.mark.parametrize("z", [mpmath.mpc(0.3, 1.7), mpmath.mpc(-2.5, 0.4), 4, mpmath.mpc(2.5, -0.8)])
@pytest.mark.parametrize("j", [0, 1])
def test_two_evaluators_agree(small_m2_solutions, small_m2, j, z):
    sys, pert = small_m2
    sols, facts = small_m2_solutions
    n = 8
    with mpmath.workprec(512):
        direct = eval_form(sys, pert, sols[n], j, z)
        integral = eval_form_integral(sys, pert, sols[n], facts[n], j, z)
        assert abs(direct - integral) <= 1e-60 * max(1, abs(direct))


@pytest.mark.parametrize("z", [mpmath.mpc(0.3, 1.7), mpmath.mpc(-2.5, 0.4), mpmath.mpc(2.5, 0.9)])
@pytest.mark.parametrize("j", [0, 1])
def test_H_recursion(small_m2_solutions, small_m2, j, z):
    sys, pert = small_m2
    sols, facts = small_m2_solutions
    with mpmath.workprec(512):
        lhs = eval_H(sys, pert, facts[10], sols[10], j, z)
        rhs = eval_H_integral(sys, pert, facts[10], sols[10], j, z)
        assert abs(lhs - rhs) <= 1e-60 * max(1, abs(lhs))


@pytest.mark.parametrize("j", [1, 2])
def test_H_keeps_sign_on_its_interval(small_m2_solutions, small_m2, j):
    sys, pert = small_m2
    sols, facts = small_m2_solutions
    a, b = (mpmath.mpf(v) for v in sys.interval(j).endpoints())
    with mpmath.workprec(512):
        vals = [eval_H(sys, pert, facts[10], sols[10], j, a + (b - a) * (i + 0.5) / 100)
                for i in range(100)]
    assert all(v > 0 for v in vals) or all(v < 0 for v in vals)


def test_factorization_structure(small_m2_solutions, small_m2):
    sys, pert = small_m2
    for n, fact in small_m2_solutions[1].items():
        assert len(fact.Q_roots[0]) == n - pert.D and len(fact.Q_roots[1]) == n - pert.D
        assert all(-1 < r < 1 for r in fact.Q_roots[0])
        assert all(2 < r < 3 for r in fact.Q_roots[1])
        assert len(fact.outlier_roots) == pert.D
        assert abs(fact.outlier_roots[0] - 5) < 1
        assert fact.factorization_error < mpmath.mpf(2) ** -200
        assert fact.gap_sign_changes == (0,)
        with mpmath.workprec(512):
            for r in fact.Q_roots[0]:
                assert abs(eval_Q(fact, 1, r)) < 1e-100


def test_outlier_approaches_pole(small_m2_solutions):
    facts = small_m2_solutions[1]
    dist = [abs(facts[n].outlier_roots[0] - 5) for n in sorted(facts)]
    assert all(b < a for a, b in zip(dist, dist[1:]))


def test_legendre_roots_interlace(legendre_system, zero_m1):
    prev = None
    for n in range(2, 12):
        fact = factorize(legendre_system, zero_m1, solve_hp(legendre_system, zero_m1, n))
        roots = fact.Q_roots[0]
        if prev is not None:
            assert all(roots[i] < prev[i] < roots[i + 1] for i in range(len(prev)))
        prev = roots


@pytest.mark.parametrize("n", [2, 5, 10])
def test_chebyshev_weighted_norm(n):
    sys = NikishinSystem([chebyshev(-1, 1)], 32, 256)
    pert = build_perturbation([None], precision=256)
    sol = solve_hp(sys, pert, n)
    fact = factorize(sys, pert, sol)
    with mpmath.workprec(256):
        assert abs(weighted_norm(sys, fact, sol, 1) / (mpmath.pi / 2 ** (2 * n - 1)) - 1) < 1e-60


def test_factorize_guards(legendre_system, zero_m1):
    sol = solve_hp(legendre_system, zero_m1, 4)
    with pytest.raises(ClassificationError):
        factorize(legendre_system, zero_m1, sol, band=0.5)
    with pytest.raises(IndexError):
        weighted_norm(legendre_system, factorize(legendre_system, zero_m1, sol), sol, 2)


def test_localization_error_reports_counts(small_m2):
    sys, _ = small_m2
    # declaring a pole that a does not follow: fake D via an unrelated factor count
    pert = build_perturbation([None, ((1,), (-5, 1))], intervals=sys.intervals, precision=512)
    sol = solve_hp(sys, build_perturbation([None, None], precision=512), 6)
    with pytest.raises(LocalizationError) as info:
        factorize(sys, pert, sol)
    assert info.value.found == 6 and info.value.expected == 5
