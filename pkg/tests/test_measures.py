import warnings

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from mlhp.measures import (DegradedAccuracyWarning, Interval, MeasureSpec, NearSupportError,
                           WeightSpec, build_quadrature, cauchy_transform, moments)

from conftest import chebyshev, uniform


def test_interval_requires_ordered_endpoints():
    with pytest.raises(ValueError):
        Interval(1, 1)


def test_two_point_gauss_rule():
    rule = build_quadrature(uniform(-1, 1), 2, 128)
    with mpmath.workprec(128):
        s = 1 / mpmath.sqrt(3)
        assert max(abs(x - y) for x, y in zip(sorted(rule.nodes), (-s, s))) < mpmath.mpf(2) ** -120
        assert all(abs(w - 1) < mpmath.mpf(2) ** -120 for w in rule.weights)


def test_one_point_rule():
    rule = build_quadrature(uniform(-1, 1), 1, 64)
    assert abs(rule.nodes[0]) < 1e-18 and abs(rule.weights[0] - 2) < 1e-18


def test_uniform_moments_and_mass():
    rule = build_quadrature(uniform(-1, 1), 8, 256)
    c = moments(rule, 2)
    with mpmath.workprec(256):
        assert abs(c[0] - 2) < mpmath.mpf(2) ** -200
        assert abs(c[1]) < mpmath.mpf(2) ** -200
        assert abs(c[2] - mpmath.mpf(2) / 3) < mpmath.mpf(2) ** -200
        assert abs(rule.mass - 2) < mpmath.mpf(2) ** -200


def test_chebyshev_mass_is_pi():
    rule = build_quadrature(chebyshev(-1, 1), 16, 256)
    with mpmath.workprec(256):
        assert abs(rule.mass - mpmath.pi) < mpmath.mpf(2) ** -200


@pytest.mark.parametrize("alpha,beta", [(0.5, -0.5), (2, 1), (-0.25, 0.75)])
def test_jacobi_moments_match_beta_integrals(alpha, beta):
    spec = MeasureSpec(Interval(-1, 1), WeightSpec("jacobi", alpha=alpha, beta=beta))
    rule = build_quadrature(spec, 12, 256)
    c = moments(rule, 23)
    with mpmath.workprec(256):
        a, b = mpmath.mpf(alpha), mpmath.mpf(beta)
        for p in (0, 1, 5, 23):
            # t = 2u - 1 and binomial expansion against Beta integrals
            exact = 2 ** (a + b + 1) * mpmath.fsum(
                mpmath.binomial(p, k) * 2 ** k * (-1) ** (p - k) * mpmath.beta(k + b + 1, a + 1)
                for k in range(p + 1))
            assert abs(c[p] - exact) < mpmath.mpf(10) ** -40 * max(1, abs(exact))


def test_tabulated_constant_weight_integrates_polynomials():
    spec = MeasureSpec(Interval(0, 2), WeightSpec("tabulated", samples=((0, 3), (1, 3), (2, 3))))
    rule = build_quadrature(spec, 16, 256)
    c = moments(rule, 5)
    with mpmath.workprec(256):
        for p in range(6):
            assert abs(c[p] - 3 * mpmath.mpf(2) ** (p + 1) / (p + 1)) < mpmath.mpf(2) ** -150


def test_moment_beyond_exactness_warns():
    rule = build_quadrature(uniform(-1, 1), 2, 64)
    with warnings.catch_warnings(record=True) as got:
        warnings.simplefilter("always")
        moments(rule, 4)
    assert any(issubclass(w.category, DegradedAccuracyWarning) for w in got)


def test_bad_weight_descriptors_rejected():
    with pytest.raises(ValueError):
        WeightSpec("gaussian")
    with pytest.raises(ValueError):
        WeightSpec("jacobi", alpha=-1, beta=0)


def test_cauchy_transform_at_three_is_log_two():
    rule = build_quadrature(uniform(-1, 1), 64, 256)
    with mpmath.workprec(256):
        assert abs(cauchy_transform(rule, 3) - mpmath.log(2)) < mpmath.mpf(10) ** -50


def test_cauchy_transform_far_away_and_on_imaginary_axis():
    rule = build_quadrature(uniform(-1, 1), 16, 128)
    z = mpmath.mpf(10) ** 6
    assert abs(cauchy_transform(rule, z) - 2 / z) < 1e-12
    w = cauchy_transform(rule, mpmath.mpc(0, 1))
    assert abs(mpmath.re(w)) < 1e-30 and mpmath.im(w) < 0


def test_near_support_refused():
    rule = build_quadrature(uniform(-1, 1), 8, 64)
    with pytest.raises(NearSupportError):
        cauchy_transform(rule, mpmath.mpf("0.5"))
    with pytest.raises(NearSupportError):
        cauchy_transform(rule, 1 + mpmath.mpf(10) ** -8)


@settings(deadline=None, max_examples=40)
@given(st.floats(1.01, 50), st.sampled_from(["uniform", "chebyshev", "jacobi"]))
def test_transform_sign_and_odd_moments(x, kind):
    spec = MeasureSpec(Interval(-1, 1), WeightSpec(kind, alpha=1, beta=1) if kind == "jacobi"
                       else WeightSpec(kind))
    rule = build_quadrature(spec, 10, 128)
    assert cauchy_transform(rule, x) > 0
    assert cauchy_transform(rule, -x) < 0
    c = moments(rule, 7)
    assert all(abs(c[p]) < 1e-30 for p in (1, 3, 5, 7))


@settings(deadline=None, max_examples=25)
@given(st.floats(2.5, 40), st.floats(0, 6.28))
def test_transform_decay_bound(r, t):
    rule = build_quadrature(uniform(-1, 1), 10, 128)
    z = mpmath.mpc(r * mpmath.cos(t), r * mpmath.sin(t))
    c = moments(rule, 2)
    # sum w/(z-x) - c0/z = sum w x / (z (z - x)); |x| <= 1, |z| >= 2.5
    bound = abs(c[0]) / abs(z) ** 2 / (1 - 1 / abs(z))
    assert abs(cauchy_transform(rule, z) - c[0] / z) <= bound * (1 + 1e-12)
