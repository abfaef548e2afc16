import math

import mpmath
import numpy as np
import pytest

from core.errors import DependencyError, DomainError, ValidationError
from core.lfunc import (ArrayCoefficients, SelfDualLSpec, curve_spec, find_family_zeros,
                        find_zeros, hardy_Z, hardy_Z_with_residue, l_value, lambda_smooth,
                        lowest_zero_summary, quadratic_spec, smoothing_parameter, vanishing_order,
                        zero_count)
from curves.catalogue import named_curve

from .conftest import ZETA_ZEROS

CHI_MINUS_4 = [0, 1, 0, -1]


def test_spec_validation():
    with pytest.raises(ValidationError):
        SelfDualLSpec(Q=0.0, kappa=1.0, lam=0.5, w=1, coefficients=None, label="bad")
    with pytest.raises(ValidationError):
        SelfDualLSpec(Q=1.0, kappa=1.0, lam=0.5, w=2, coefficients=None, label="bad")
    with pytest.raises(ValidationError):
        SelfDualLSpec(Q=1.0, kappa=0.7, lam=0.5, w=1, coefficients=None, label="bad")


def test_quadratic_spec():
    spec = quadratic_spec(-4)
    assert spec.kappa == 0.5 and spec.lam == 0.5 and spec.w == 1
    assert spec.Q == pytest.approx(math.sqrt(4 / math.pi))
    assert quadratic_spec(5).lam == 0.0
    for d in (1, 9, 0, 6):
        with pytest.raises(ValidationError):
            quadratic_spec(d)


def test_curve_spec_limits():
    with pytest.raises(ValidationError):
        curve_spec(named_curve("E24"))
    with pytest.raises(DomainError):
        curve_spec(named_curve("E11"))
    spec = curve_spec(named_curve("E1"), bound=30, infer=False)
    assert spec.w is None
    with pytest.raises(ValidationError):
        hardy_Z(spec, 1.0)


def test_array_coefficients_bound():
    coeffs = ArrayCoefficients(np.arange(11.0))
    assert coeffs(5).tolist() == [0, 1, 2, 3, 4, 5]
    with pytest.raises(DependencyError):
        coeffs(11)


def test_smoothing_parameter():
    assert smoothing_parameter(0.0) == 1.0
    delta = smoothing_parameter(50.0, 1.25)
    assert abs(delta) == pytest.approx(1.25)
    assert 0 < math.atan2(delta.imag, delta.real) < math.pi / 2
    assert smoothing_parameter(-50.0) == pytest.approx(smoothing_parameter(50.0).conjugate())


def test_dirichlet_l_values():
    catalan = 0.915965594177219015
    assert l_value(quadratic_spec(-4), 2.0).value == pytest.approx(catalan, abs=1e-10)
    golden = (1 + math.sqrt(5)) / 2
    assert l_value(quadratic_spec(5), 1.0).value == pytest.approx(
        2 * math.log(golden) / math.sqrt(5), abs=1e-10)


@pytest.mark.parametrize("t", [3.0, 10.0, 25.0])
def test_hardy_z_magnitude_matches_mpmath(t):
    spec = quadratic_spec(-4)
    expected = abs(complex(mpmath.dirichlet(0.5 + 1j * t, CHI_MINUS_4)))
    assert abs(hardy_Z(spec, t)) == pytest.approx(expected, rel=1e-7, abs=1e-9)


@pytest.mark.parametrize("spec_factory", [
    lambda: quadratic_spec(-4),
    lambda: quadratic_spec(5),
    lambda: curve_spec(named_curve("E1")),
    lambda: curve_spec(named_curve("C15")),
])
def test_functional_equation(spec_factory):
    spec = spec_factory()
    rng = np.random.default_rng(7)
    for sigma, t in zip(rng.uniform(-0.5, 1.5, 10), rng.uniform(-20, 20, 10)):
        s = complex(sigma, t)
        left = lambda_smooth(spec, s).value
        right = spec.w * lambda_smooth(spec, 1 - s).value
        assert abs(left - right) <= 1e-8 * max(abs(left), 1e-300)


CRITICAL_LINE_SPECS = [
    lambda: quadratic_spec(-4),
    lambda: quadratic_spec(5),
    lambda: curve_spec(named_curve("E1")),
    lambda: curve_spec(named_curve("C15")),
]


@pytest.mark.parametrize("spec_factory", CRITICAL_LINE_SPECS)
def test_hardy_z_discards_negligible_imaginary_part(spec_factory):
    spec = spec_factory()
    residues = [abs(hardy_Z_with_residue(spec, t)[1]) for t in np.linspace(0.0, 30.0, 121)]
    assert max(residues) < 1e-8


@pytest.mark.parametrize("spec_factory", CRITICAL_LINE_SPECS)
def test_functional_equation_on_critical_line(spec_factory):
    spec = spec_factory()
    for t in np.linspace(0.37, 29.9, 50):
        left = lambda_smooth(spec, complex(0.5, t)).value
        right = spec.w * lambda_smooth(spec, complex(0.5, -t)).value
        assert abs(left - right) <= 1e-9 * max(abs(left), abs(right), 1e-300)


def test_root_numbers_are_inferred():
    assert curve_spec(named_curve("E1")).w == -1
    assert curve_spec(named_curve("E2")).w == 1
    assert curve_spec(named_curve("C15")).w == 1


def test_vanishing_order():
    assert vanishing_order(curve_spec(named_curve("C15"))) == 0
    assert vanishing_order(curve_spec(named_curve("E1"))) == 1
    assert vanishing_order(curve_spec(named_curve("E2"))) == 2


def test_vanishing_order_rank_four():
    assert vanishing_order(curve_spec(named_curve("E4"))) == 4


def test_vanishing_order_of_dirichlet_l_functions():
    assert vanishing_order(quadratic_spec(-4)) == 0
    assert vanishing_order(quadratic_spec(5)) == 0
    with pytest.raises(DomainError):
        vanishing_order(quadratic_spec(5), max_order=20, points=32)


@pytest.mark.slow
def test_vanishing_order_rank_three():
    assert vanishing_order(curve_spec(named_curve("E3"))) == 3


def test_first_zero_of_chi_minus_4():
    zeros = find_zeros(quadratic_spec(-4), 10.0)
    assert zeros.complete
    assert zeros.ordinates[0] == pytest.approx(6.020948904697597, abs=1e-7)
    assert zeros.spec is not None


def test_curve_zeros_are_certified():
    spec = curve_spec(named_curve("E1"))
    zeros = find_zeros(spec, 12.0)
    assert zeros.complete and len(zeros) > 0
    assert len(zeros) == zero_count(spec, zeros.height_bound, t0=zeros.metadata["scan_start"])
    for g in zeros.ordinates.tolist():
        assert abs(hardy_Z(spec, g)) < 1e-7


def test_family_zeros_keep_order():
    family = find_family_zeros([-4, 5, -3], 15.0)
    assert list(family) == [-4, 5, -3]
    assert all(zl.complete for zl in family.values())
    summary = lowest_zero_summary(family)
    assert summary["negative"]["count"] == 2
    assert summary["positive"]["count"] == 1
    assert summary["positive"]["mean_lowest"] == pytest.approx(family[5].ordinates[0])


def _local_maxima(ts, values):
    inner = (values[1:-1] > values[:-2]) & (values[1:-1] >= values[2:])
    return ts[1:-1][inner], values[1:-1][inner]


@pytest.mark.slow
def test_rank_six_spikes_near_zeta_zeros():
    spec = curve_spec(named_curve("E6"))
    ts = np.arange(5.0, 30.0, 0.05)
    values = np.abs([hardy_Z(spec, t) for t in ts])
    window = (ts > 10) & (ts < 25)
    peaks, heights = _local_maxima(ts[window], values[window])
    top = peaks[np.argsort(heights)[-2:]]
    for zero in ZETA_ZEROS[:2]:
        assert np.min(np.abs(top - zero)) < 0.5
    assert heights.max() > 10 * np.median(values)
