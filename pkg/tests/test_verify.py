import math

import mpmath
import pytest
from hypothesis import given, strategies as st

from mlhp.equilibrium import solve_vector_equilibrium
from mlhp.hp_solver import solve_hp
from mlhp.verify import (AsymptoticReport, ExcludedPointError, Record, form_asymptotics_check,
                         identity_residuals, pole_attraction_check, rate_check,
                         ratio_and_recovery_check, sample_z_points, summarize, trend_verdict,
                         zero_distribution_check)


@pytest.fixture(scope="module")
def eq_small():
    return solve_vector_equilibrium([(-1, 1), (2, 3)], grid_size=400, tol=1e-3)


def test_trend_verdict_examples():
    assert trend_verdict([0.5, 0.3, 0.2, 0.1])
    assert not trend_verdict([0.5, 0.3, 0.1, 0.2])
    assert trend_verdict([0.5, 0.6, 0.2, 0.1])          # only the trailing half matters
    assert trend_verdict([-0.4, 0.3, -0.2, 0.1])        # absolute values
    assert trend_verdict([1e-40, 1e-38, 1e-41], floor=1e-30)
    assert trend_verdict([0.1])


@given(st.lists(st.floats(0, 1), min_size=2, max_size=12))
def test_sorted_gaps_always_pass(gaps):
    assert trend_verdict(sorted(gaps, reverse=True))


def test_z_points_are_seeded_and_clear_of_supports(small_m2):
    sys, pert = small_m2
    a = sample_z_points(sys, pert, 12, seed=7)
    assert a == sample_z_points(sys, pert, 12, seed=7)
    assert a != sample_z_points(sys, pert, 12, seed=8)
    for z in a:
        assert abs(z - 5) >= 0.25
        assert not (-1.25 < z.real < 1.25 and abs(z.imag) < 0.25)
        assert 1.2 * 2 <= abs(z - 1) <= 2.5 * 2


def test_point_on_interval_is_excluded(small_m2_solutions, small_m2, eq_small):
    sys, pert = small_m2
    with pytest.raises(ExcludedPointError):
        form_asymptotics_check(small_m2_solutions[0], sys, pert, eq_small, 0, [complex(0.5, 0)])
    with pytest.raises(ExcludedPointError):
        rate_check(small_m2_solutions[0], sys, pert, eq_small, 0, [complex(5, 0)])


def test_identity_stack_holds(small_m2_solutions, small_m2):
    sys, pert = small_m2
    sol = small_m2_solutions[0][10]
    for z in (mpmath.mpc(0.4, 1.3), mpmath.mpc(3.7, -0.6)):
        for j in range(2):
            res, scale = identity_residuals(sol, sys, pert, j, z)
            assert res <= mpmath.mpf(2) ** -256 * scale


def test_recovery_gap_shrinks(small_m2_solutions, small_m2, eq_small):
    sys, pert = small_m2
    recs = ratio_and_recovery_check(small_m2_solutions[0], sys, pert, eq_small,
                                    [complex(3.5, 1.5)])
    gaps = [r.gap for r in recs if r.quantity == "recovery_gap"]
    assert len(gaps) == 4 and all(b < a for a, b in zip(gaps, gaps[1:]))
    ratios = [r for r in recs if r.quantity == "ratio_exponent"]
    assert {(r.j, r.k) for r in ratios} == {(0, 1), (0, 2), (1, 2)}


def test_zero_distribution_records(small_m2_solutions, eq_small):
    recs = zero_distribution_check(small_m2_solutions[1], eq_small, 1)
    assert [r.n for r in recs] == [4, 6, 8, 10]
    assert all(0 < r.measured < 0.5 for r in recs)


def test_pole_attraction_records(small_m2_solutions, small_m2):
    _, pert = small_m2
    recs = pole_attraction_check(small_m2_solutions[1], pert)
    d = [r.measured for r in recs]
    assert all(b < a for a, b in zip(d, d[1:]))
    empty = pole_attraction_check(small_m2_solutions[1], type(pert)(pert.numerators,
                                  pert.denominators, (1,), 0, (), pert.precision))
    assert all(r.measured == math.inf for r in empty)


def test_single_level_rate(legendre_system, zero_m1):
    eq = solve_vector_equilibrium([(-1, 1)], grid_size=400, tol=1e-3)
    sols = {n: solve_hp(legendre_system, zero_m1, n) for n in (8, 16, 24)}
    recs = rate_check(sols, legendre_system, zero_m1, eq, 0, [complex(3, 0)])
    g = [r.gap for r in recs]
    assert all(b <= a for a, b in zip(g, g[1:]))
    assert math.exp(recs[-1].measured) == pytest.approx(0.029437, rel=0.05)


def _rec(claim, n, gap, quantity="q"):
    return Record(claim, quantity, n, 1, -1, -1, None, gap, 0.0, gap)


def test_summarize_verdicts():
    rep = AsymptoticReport("x", (1, 2, 3, 4))
    rep.extend(_rec("weak_Qnj", n, g) for n, g in zip((1, 2, 3, 4), (0.4, 0.3, 0.2, 0.1)))
    rep.extend(_rec("limit_nesimo", n, g) for n, g in zip((1, 2, 3, 4), (0.4, 0.3, 0.1, 0.2)))
    rep.extend(_rec("geometric_speed_an0", n, g) for n, g in zip((1, 2), (0.2, 0.01)))
    rows = {r["claim"]: r for r in summarize(rep, slack=0.05)}
    assert rows["weak_Qnj"]["trend"] == "nonincreasing"
    assert rows["limit_nesimo"]["trend"] == "increasing"
    assert rows["geometric_speed_an0"]["bound"] == "pass"
    assert rows["weak_Qnj"]["max_abs_gap"] == 0.4 and rows["weak_Qnj"]["n_last"] == 4
