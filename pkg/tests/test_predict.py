import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from arith.primes import sieve_primes
from core.errors import DomainError, ValidationError
from core.special import digamma
from predict.conrey_snaith import (cs_density_averaged, cs_density_integrand,
                                   cs_paircorr_prediction, even_guarded, paircorr_r_integrand)
from predict.euler_products import A_D, A_D_prime, A_pc, B_pc
from predict.kernels import kernel_gue_pc, kernel_symplectic
from predict.local_factors import local_correction, local_prime_set, rank_ratio_prediction
from predict.prediction import (PredictionCurve, density_curve, kernel_curve, one_line_curves,
                                paircorr_curve, rank_ratio_curve)


def test_arithmetic_factors_at_zero():
    assert A_D(0).value == pytest.approx(1.0, abs=1e-10)
    assert A_pc(0).value == pytest.approx(1.0, abs=1e-10)
    assert A_D(0, cutoff=10 ** 4).value == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("r", [0.1j, 0.2, -0.3 + 2j])
def test_A_D_closed_form_matches_product(r):
    closed = A_D(r)
    truncated = A_D(r, cutoff=10 ** 5)
    assert abs(truncated.value - closed.value) <= truncated.tail_bound + 1e-9


def test_prime_sums_at_zero():
    p = sieve_primes(10 ** 6).primes.astype(np.float64)
    direct_a = math.fsum((np.log(p) / ((p + 1) * (p - 1))).tolist())
    direct_b = math.fsum(((np.log(p) / (p - 1)) ** 2).tolist())
    assert A_D_prime(0).value.real == pytest.approx(direct_a, abs=1e-4)
    assert B_pc(0).value.real == pytest.approx(direct_b, abs=1e-4)


def test_A_pc_is_stable_under_cutoff():
    a = A_pc(0.2j, cutoff=10 ** 5)
    b = A_pc(0.2j, cutoff=2 * 10 ** 5)
    assert abs(a.value - b.value) <= a.tail_bound + b.tail_bound + 1e-12


def test_strips_are_enforced():
    with pytest.raises(DomainError):
        A_D(0.6)
    with pytest.raises(DomainError):
        A_D_prime(0.3)
    with pytest.raises(DomainError):
        B_pc(0.6)
    with pytest.raises(DomainError):
        A_pc(-0.5)


def test_even_guarded():
    assert even_guarded(math.cos, 1e-4) == pytest.approx(1.0, abs=1e-8)
    assert even_guarded(math.cos, 0.5) == math.cos(0.5)


def test_density_main_term():
    d, t = 5 * 10 ** 4, 3.0
    expected = (math.log(d / math.pi) + digamma(complex(0.25, t / 2)).real) / (2 * math.pi)
    assert cs_density_integrand(d, t, lower_terms=False) == pytest.approx(expected, rel=1e-12)
    expected_neg = (math.log(d / math.pi) + digamma(complex(0.75, t / 2)).real) / (2 * math.pi)
    assert cs_density_integrand(-d, t, lower_terms=False) == pytest.approx(expected_neg, rel=1e-12)


def test_density_is_continuous_across_guard():
    below = cs_density_integrand(1001, 0.999e-3)
    above = cs_density_integrand(1001, 1.001e-3)
    assert below == pytest.approx(above, abs=1e-5)
    assert math.isfinite(cs_density_integrand(1001, 0.0))


def test_family_average_of_one_is_the_integrand():
    for t in (0.5, 4.0, 11.0):
        assert cs_density_averaged([1001], t) == pytest.approx(cs_density_integrand(1001, t), rel=1e-12)
    with pytest.raises(ValidationError):
        cs_density_averaged([5, -4], 1.0)
    with pytest.raises(ValidationError):
        cs_density_averaged([], 1.0)


def test_log_squared_main_term():
    T = 1000.0
    value, _ = integrate.quad(lambda t: math.log(t / (2 * math.pi)) ** 2, 0, T,
                              limit=200, epsabs=0, epsrel=1e-12)
    assert paircorr_r_integrand(T, 0.3, lower_terms=False) == pytest.approx(value, rel=1e-8)
    expected = 0.1 * value / (2 * math.pi) ** 2
    assert cs_paircorr_prediction(T, (0.5, 0.6), lower_terms=False) == pytest.approx(expected, rel=1e-7)


def test_paircorr_prediction_validation():
    with pytest.raises(ValidationError):
        cs_paircorr_prediction(10.0, (9.0, 11.0))
    with pytest.raises(ValidationError):
        cs_paircorr_prediction(-1.0, (0.0, 1.0))


def test_local_prime_sets():
    assert local_prime_set(2) == []
    assert local_prime_set(3) == [2]
    assert local_prime_set(4) == [2, 3]
    assert local_prime_set(6) == [2, 3, 5, 7]


def test_local_correction_of_rank_six(e6):
    s = complex(0.5, 7.0)

    def x(p):
        return p ** (-s - 0.5)

    expected = 1 + 0j
    for p, a in ((2, -1), (3, -1)):
        expected *= 1 / (1 - a * x(p)) * (1 - x(p)) ** -6
    for p, a in ((5, -4), (7, -4)):
        expected *= 1 / (1 - a * x(p) + p ** (-2 * s)) * (1 - x(p)) ** -6
    assert local_correction(e6, 6, s).value == pytest.approx(expected, rel=1e-12)


def test_rank_ratio_prediction(e6):
    t = 7.0
    zeta_1 = abs(complex(mpmath.zeta(complex(1, t))))
    assert rank_ratio_prediction(e6, 6, t, corrected=False) == pytest.approx(zeta_1 ** -6, rel=1e-10)
    corrected = rank_ratio_prediction(e6, 6, t)
    assert corrected == pytest.approx(abs(local_correction(e6, 6, complex(0.5, t)).value) * zeta_1 ** -6,
                                      rel=1e-10)
    assert rank_ratio_prediction(e6, 6, 0.0) == 0.0
    assert rank_ratio_prediction(e6, 0, 3.0, corrected=False) == 1.0


def test_kernels():
    assert kernel_symplectic(0.0) == pytest.approx(0.0)
    assert kernel_gue_pc(0.0) == pytest.approx(0.0)
    assert kernel_gue_pc(1.0) == pytest.approx(1.0)
    assert kernel_symplectic(0.5) == pytest.approx(1.0)
    assert np.allclose(kernel_gue_pc(np.array([50.5, 100.5])), 1.0, atol=1e-3)


def test_prediction_curve_validation():
    with pytest.raises(ValidationError):
        PredictionCurve(np.array([0.0, 1.0]), np.array([1.0]), "short")
    with pytest.raises(ValidationError):
        PredictionCurve(np.array([1.0, 0.0]), np.array([1.0, 1.0]), "descending")
    with pytest.raises(ValidationError):
        PredictionCurve(np.array([0.0, 1.0]), np.array([1.0, np.nan]), "nan")
    curve = PredictionCurve(np.array([0.0, 1.0]), np.array([2.0, 3.0]), "ok")
    assert curve.rows() == [(0.0, 2.0, "ok"), (1.0, 3.0, "ok")]


def test_prediction_curves(e6):
    ratio = rank_ratio_curve(e6, 6, [1.0, 2.0, 3.0])
    assert len(ratio) == 3 and ratio.metadata["rank"] == 6
    kernel = kernel_curve("gue", [0.0, 0.5, 1.0])
    assert kernel.values[0] == pytest.approx(0.0)
    with pytest.raises(ValidationError):
        kernel_curve("goe", [0.0])
    density = density_curve([1.0, 2.0], d=1001, lower_terms=False)
    assert density.values[0] == pytest.approx(cs_density_integrand(1001, 1.0, lower_terms=False))
    with pytest.raises(ValidationError):
        density_curve([1.0])


def test_paircorr_curve_centres():
    curve = paircorr_curve(1000.0, [0.5, 0.6, 0.7], lower_terms=False)
    assert curve.abscissae.tolist() == pytest.approx([0.55, 0.65])
    assert curve.values[0] == pytest.approx(curve.values[1])


def test_one_line_curves():
    curves = one_line_curves([0.0, 1.0, 10.0])
    assert set(curves) == {"abs_zeta_1", "abs_zeta_half", "abs_logderiv_1",
                           "abs_logderiv_prime_1", "inverse_abs_zeta_1"}
    assert curves["abs_zeta_1"].abscissae.tolist() == [1.0, 10.0]
    value = abs(complex(mpmath.zeta(complex(1, 10))))
    assert curves["abs_zeta_1"].values[1] == pytest.approx(value, rel=1e-10)
    assert curves["inverse_abs_zeta_1"].values[1] == pytest.approx(1 / value, rel=1e-10)
