import cmath
import math

import pytest

from core.errors import PrecisionError
from core.zero_scan import (arg_variation, nudged_count, scan_grid, scan_window, sign_change_zeros,
                            split_windows)


def test_scan_grid_respects_spacing():
    grid = scan_grid(0.0, 1.0, lambda t: 0.3)
    assert grid.tolist() == pytest.approx([0.0, 0.3, 0.6, 0.9, 1.0])


def test_sign_changes_are_refined():
    zeros = sign_change_zeros(math.sin, [0.5 + 0.5 * k for k in range(20)], 1e-12)
    assert zeros == pytest.approx([math.pi, 2 * math.pi, 3 * math.pi], abs=1e-10)


def test_scan_window_refines_close_pairs():
    def f(t):
        return (t - 1.1) * (t - 1.13) * (t - 3.3)

    result = scan_window(f, 0.0, 4.0, 3, lambda t: 1.0, 1e-12)
    assert result.matched
    assert result.refinements > 0
    assert result.zeros == pytest.approx([1.1, 1.13, 3.3], abs=1e-9)


def test_scan_window_reports_mismatch():
    result = scan_window(lambda t: (t - 1.0) ** 2 + 1.0, 0.0, 2.0, 2, lambda t: 1.0, 1e-12,
                         max_refinements=2)
    assert not result.matched
    assert result.zeros == []


def test_arg_variation_unwraps():
    # exp(i 10 sigma) winds several times between 0 and 1
    assert arg_variation(lambda s: cmath.exp(10j * s), 0.0, 1.0) == pytest.approx(10.0)


def test_arg_variation_fails_through_a_zero():
    with pytest.raises(PrecisionError):
        arg_variation(lambda s: complex(s - 0.5, 0.0), 0.0, 1.0)


def test_split_windows_cover_range():
    windows = split_windows(0.0, 100.0, lambda t: 1.0, zeros_per_window=40)
    assert windows[0][0] == 0.0 and windows[-1][1] == 100.0
    assert all(a < b for a, b in windows)
    assert all(w[1] == v[0] for w, v in zip(windows, windows[1:]))


def test_nudged_count_moves_off_an_ordinate():
    def count(x):
        return x if abs(x - 2.5) > 0.01 else 2.5

    x, n = nudged_count(count, 2.5, 10.0)
    assert x != 2.5
    assert abs(count(x) - n) <= 0.25
    with pytest.raises(PrecisionError):
        nudged_count(lambda x: 0.5, 1.0, 1.0)
