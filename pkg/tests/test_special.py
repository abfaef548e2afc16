import math

import mpmath
import pytest

from core.errors import DomainError, PoleError, PrecisionError
from core.special import (ComplexEval, digamma, inc_gamma_upper, inc_gamma_upper_array, loggamma,
                          trigamma)


def test_loggamma_matches_mpmath():
    for z in (0.5, 3.7, 0.25 + 10j, 1.5 - 40j, 0.75 + 200j):
        got = loggamma(z)
        assert abs(got.value - complex(mpmath.loggamma(z))) < 1e-12 * max(1.0, abs(got.value))


def test_digamma_at_quarters():
    assert digamma(0.25).real == pytest.approx(-4.2274535, abs=1e-7)
    assert digamma(0.75).real == pytest.approx(-1.0858609, abs=1e-7)
    assert digamma(0.25 + 5j).value == pytest.approx(complex(mpmath.digamma(0.25 + 5j)), rel=1e-12)


def test_trigamma_matches_mpmath():
    for z in (1.5, 0.75 + 3j, 2 + 50j):
        assert trigamma(z).value == pytest.approx(complex(mpmath.psi(1, z)), rel=1e-12)


def test_gamma_poles():
    for z in (0, -1, -2.0):
        with pytest.raises(PoleError):
            loggamma(z)
    with pytest.raises(PoleError):
        digamma(-3)


@pytest.mark.parametrize("x", [0.5, 3.0, 10.0, 40.0])
def test_inc_gamma_matches_mpmath(x):
    z = 1.5 + 5j
    got = inc_gamma_upper(z, x)
    expected = complex(mpmath.gammainc(z, a=x))
    assert abs(got.value - expected) <= 1e-10 * abs(expected)
    assert got.abs_error_bound < 1e-8 * abs(expected)


def test_inc_gamma_methods_agree_at_crossover():
    z = 1.5 + 5j
    x = abs(z) + 1.0
    series = inc_gamma_upper(z, x, method='series').value
    fraction = inc_gamma_upper(z, x, method='continued_fraction').value
    assert abs(series - fraction) <= 1e-9 * abs(fraction)


def test_inc_gamma_scaled_array():
    z = 0.5 + 2j
    xs = [0.1, 1.0, 5.0, 30.0]
    values, errors = inc_gamma_upper_array(z, xs, log_scale=2.0)
    for x, v, e in zip(xs, values, errors):
        expected = complex(mpmath.gammainc(z, a=x)) * math.exp(-2.0)
        assert abs(v - expected) <= 1e-10 * abs(expected)
        assert e >= 0


def test_inc_gamma_domain():
    with pytest.raises(DomainError):
        inc_gamma_upper(1.0, 0.0)


def test_error_bounds_propagate():
    a = ComplexEval(1 + 1j, 1e-10)
    b = ComplexEval(2.0, 1e-12)
    assert (a + b).abs_error_bound == pytest.approx(1e-10 + 1e-12)
    assert (a * b).value == 2 + 2j
    assert (a * b).abs_error_bound >= 2e-10
    assert (1 - a).value == -1j
    with pytest.raises(PrecisionError):
        a / ComplexEval(1e-13, 1e-12)
    with pytest.raises(PrecisionError):
        ComplexEval(1.0, float('nan'))


@pytest.mark.parametrize("m", [0, 1, 3])
@pytest.mark.parametrize("x", [0.3, 0.9, 2.5, 12.0])
def test_inc_gamma_at_gamma_poles(m, x):
    got = inc_gamma_upper(-m, x)
    expected = float(mpmath.gammainc(-m, a=x))
    assert got.value.real == pytest.approx(expected, rel=1e-11)
    assert abs(got.value.imag) < 1e-12 * abs(expected)
    assert got.abs_error_bound < 1e-9 * abs(expected)


def test_inc_gamma_zero_order_is_exponential_integral():
    from scipy.special import exp1

    values, _ = inc_gamma_upper_array(0, [0.05, 0.5, 0.99], log_scale=1.0)
    for v, x in zip(values, (0.05, 0.5, 0.99)):
        assert v.real == pytest.approx(exp1(x) * math.exp(-1.0), rel=1e-13)


def test_inc_gamma_series_rejects_poles():
    with pytest.raises(PoleError):
        inc_gamma_upper(-2, 0.5, method='series')
