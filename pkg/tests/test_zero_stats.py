import math

import numpy as np
import pytest
from scipy.optimize import brentq

from arith.characters import enumerate_fundamental_discriminants
from core.errors import DomainError, IncompletenessError, ValidationError
from core.lfunc import find_family_zeros
from core.zero_stats import (Histogram, bin_averages, chi_square_against_kernel, discrepancy,
                             one_level_density, pair_correlation, pair_differences, sign_runs_test)
from core.zeta import ZeroList, riemann_siegel_theta, zeta_zeros
from predict.kernels import kernel_gue_pc
from predict.prediction import PredictionCurve, density_curve, kernel_curve


def _zeros(*ordinates, height=None, complete=True):
    ords = np.array(ordinates, dtype=np.float64)
    return ZeroList(ords, height if height is not None else float(ords[-1]) + 1.0, complete)


def test_histogram_validation():
    with pytest.raises(ValidationError):
        Histogram(0.0, 0.0, np.zeros(3), 1.0)
    with pytest.raises(ValidationError):
        Histogram(0.1, 0.0, np.zeros(3), 0.0)
    with pytest.raises(DomainError):
        Histogram(0.1, 0.0, np.array([1.0, -1.0]), 1.0)
    hist = Histogram(0.5, 1.0, np.array([1.0, 2.0]), 2.0)
    assert hist.edges.tolist() == [1.0, 1.5, 2.0]
    assert hist.centres.tolist() == [1.25, 1.75]
    assert hist.raw_counts.tolist() == [2.0, 4.0]
    assert hist.rows() == [(1.0, 1.5, 1.0), (1.5, 2.0, 2.0)]


def test_single_zero_lands_in_one_bin():
    hist = one_level_density({5: _zeros(5.0, height=6.0)}, 0.05, 4.95, 5.05)
    assert len(hist) == 2
    assert hist.raw_counts.tolist() == pytest.approx([0.0, 1.0])
    assert hist.counts[1] == pytest.approx(1 / 0.05)


def test_density_is_symmetrized():
    family = {5: _zeros(2.0, 3.0, height=10.0), 8: _zeros(2.5, height=10.0)}
    hist = one_level_density(family, 0.5, -5.0, 5.0)
    assert hist.total_weight == 6.0
    assert hist.raw_counts.sum() == pytest.approx(6.0)
    assert hist.normalization == 2 * 0.5


def test_density_rescaled_mode():
    d = 5
    scale = math.log(d) / (2 * math.pi)
    hist = one_level_density({d: _zeros(5.0, height=10.0)}, 0.1, 0.0, 2.0, mode='rescaled')
    index = int(math.floor(5.0 * scale / 0.1))
    assert hist.raw_counts[index] == pytest.approx(1.0)
    assert hist.total_weight == 1.0


def test_density_needs_complete_lists():
    with pytest.raises(DomainError):
        one_level_density({}, 0.1, 0.0, 1.0)
    with pytest.raises(IncompletenessError) as info:
        one_level_density({5: _zeros(5.0, height=6.0, complete=False)}, 0.1, 0.0, 5.0)
    assert info.value.partial is not None
    with pytest.raises(IncompletenessError):
        one_level_density({5: _zeros(5.0, height=6.0)}, 0.1, 0.0, 20.0)
    with pytest.raises(ValidationError):
        one_level_density({5: _zeros(5.0)}, 0.1, 0.0, 1.0, mode='scaled')


def test_pair_differences():
    diffs = pair_differences(np.array([1.0, 2.0, 4.0]), -10.0, 10.0)
    assert sorted(diffs.tolist()) == [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0]
    assert sorted(pair_differences(np.array([1.0, 2.0, 4.0]), 0.0, 2.5).tolist()) == [1.0, 2.0]


def test_pair_correlation_of_two_zeros():
    hist = pair_correlation(_zeros(14.13, 21.02), 0.01, -7.0, 7.0)
    assert hist.total_weight == 2.0
    occupied = hist.centres[hist.raw_counts > 0]
    assert len(occupied) == 2
    assert np.allclose(np.abs(occupied), 6.89, atol=0.01)
    assert hist.normalization == 0.01


def test_pair_correlation_needs_two_zeros():
    with pytest.raises(DomainError):
        pair_correlation(_zeros(14.13), 0.1, -1.0, 1.0)


def test_montgomery_scaling():
    ords = np.array([14.13, 21.02, 25.01, 30.42, 32.94, 37.59, 40.92, 43.33, 48.01, 49.77])
    bw, lo, hi = 0.1, 0.0, 3.0
    hist = pair_correlation(ZeroList(ords, 50.0, True), bw, lo, hi, mode='montgomery')
    off_diagonal = ~np.eye(len(ords), dtype=bool)
    raw = (ords[None, :] - ords[:, None])[off_diagonal]
    mean_height = ((ords[None, :] + ords[:, None]) / 2)[off_diagonal]
    diffs = raw * np.log(mean_height / (2 * math.pi)) / (2 * math.pi)
    index = np.searchsorted(lo + bw * np.arange(31), diffs, side='right') - 1
    index = index[(index >= 0) & (index < 30)]
    expected = np.bincount(index, minlength=30) / (len(ords) * bw)
    assert np.allclose(hist.counts, expected)
    assert hist.metadata["scale"] == "local"
    with pytest.raises(DomainError):
        pair_correlation(_zeros(1.0, 2.0), bw, lo, hi, mode='montgomery')


def _unit_spaced_ordinates(count):
    """Heights where the smooth zero count theta(t)/pi + 1 hits n - 1/2."""
    out = []
    t = 10.0
    for n in range(2, count + 2):
        target = (n - 1.5) * math.pi
        t = brentq(lambda x: riemann_siegel_theta(x) - target, t, t + 20.0)
        out.append(t)
    return np.array(out)


def test_montgomery_unfolds_by_local_density():
    ords = _unit_spaced_ordinates(300)
    assert ords[-1] / ords[0] > 10
    hist = pair_correlation(ZeroList(ords, float(ords[-1]), True), 0.1, 0.55, 1.45, mode='montgomery')
    # consecutive pairs sit one mean spacing apart at every height
    neighbours = len(ords) - 1
    assert hist.raw_counts[4] == pytest.approx(neighbours)
    assert hist.raw_counts.sum() == pytest.approx(neighbours)


def test_binning_on_exact_edges():
    for bw, lo in ((0.05, 4.95), (0.1, 0.7), (0.3, 0.9)):
        edge = lo + bw
        hist = one_level_density({5: _zeros(edge, height=edge + 1.0)}, bw, lo, lo + 2 * bw)
        assert hist.raw_counts.tolist() == [0.0, 1.0]


def test_discrepancy_of_matching_curve():
    hist = Histogram(0.1, 0.0, np.array([1.0, 2.0, 3.0]), 1.0)
    pred = PredictionCurve(hist.centres, hist.counts.copy(), "same")
    result = discrepancy(hist, pred)
    assert result.l2 == 0.0 and result.max_abs == 0.0


def test_discrepancy_against_zero():
    hist = Histogram(0.1, 0.0, np.ones(10), 1.0)
    pred = PredictionCurve(np.linspace(0.0, 1.0, 11), np.zeros(11), "zero")
    result = discrepancy(hist, pred)
    assert result.l2 == pytest.approx(1.0)
    assert result.max_abs == pytest.approx(1.0)
    assert result.per_bin == pytest.approx([1.0] * 10)


def test_bin_averages_of_linear_curve():
    hist = Histogram(0.5, 0.0, np.zeros(4), 1.0)
    pred = PredictionCurve(np.array([-1.0, 3.0]), np.array([-2.0, 6.0]), "2x")
    assert bin_averages(hist, pred) == pytest.approx(2 * hist.centres)
    with pytest.raises(DomainError):
        bin_averages(hist, PredictionCurve(np.array([0.5, 1.0]), np.array([1.0, 1.0]), "short"))


def test_chi_square_of_exact_expectation():
    bw = 0.25
    edges = 0.5 + bw * np.arange(11)
    points = edges[:-1, None] + bw * np.linspace(0.0, 1.0, 9)[None, :]
    normalization = 400.0
    counts = kernel_gue_pc(points).mean(axis=1)
    hist = Histogram(bw, 0.5, counts, normalization)
    result = chi_square_against_kernel(hist, kernel_gue_pc)
    assert result.statistic == pytest.approx(0.0, abs=1e-9)
    assert result.dof == 10
    assert result.passed


def test_runs_test():
    alternating = sign_runs_test([1.0, -1.0] * 10)
    assert alternating.runs == 20 and alternating.passed
    blocks = sign_runs_test([1.0] * 10 + [-1.0] * 10)
    assert blocks.runs == 2 and blocks.longest_run == 10
    assert blocks.expected_runs == pytest.approx(11.0)
    assert not blocks.passed
    same = sign_runs_test([0.5, 0.2, 0.0, 0.1])
    assert same.p_value == 0.0 and not same.passed
    with pytest.raises(DomainError):
        sign_runs_test([0.0, 1.0])


@pytest.mark.slow
def test_density_lower_terms_fit_small_family():
    ds = enumerate_fundamental_discriminants(0, 1000, sign='positive')
    family = find_family_zeros(ds, 11.0)
    hist = one_level_density(family, 0.25, 0.0, 10.0)
    xs = np.linspace(0.0, 10.0, 81)
    full = discrepancy(hist, density_curve(xs, discriminants=ds, lower_terms=True))
    main = discrepancy(hist, density_curve(xs, discriminants=ds, lower_terms=False))
    assert full.l2 < main.l2


@pytest.mark.slow
def test_montgomery_chi_square_passes():
    zeros = zeta_zeros(count=10000)
    hist = pair_correlation(zeros, 1 / 40, 0.0, 3.0, mode='montgomery')
    assert chi_square_against_kernel(hist, kernel_gue_pc, 0.5, 3.0).passed


@pytest.mark.extended
def test_rescaled_density_approaches_symplectic_kernel():
    ds = enumerate_fundamental_discriminants(0, 10 ** 5, sign='positive')
    height = 3.0 / (math.log(ds[0]) / (2 * math.pi)) + 1.0
    family = find_family_zeros(ds, height, parallelism=8)
    hist = one_level_density(family, 1 / 20, 0.0, 3.0, mode='rescaled')
    xs = np.linspace(0.0, 3.0, 121)
    assert discrepancy(hist, kernel_curve('symplectic', xs)).l2 < 0.2
