"""Sign-change scanning, root refinement and argument-principle counting on vertical lines."""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

import config
from core.errors import PrecisionError

logger = logging.getLogger(__name__)

RealFunction = Callable[[float], float]


@dataclass
class WindowResult:
    """Zeros located in [start, end) and whether their number matched the expected count."""

    start: float
    end: float
    zeros: List[float]
    expected: int
    matched: bool
    refinements: int = 0


def mean_gap(t: float, log_conductor: float = 0.0) -> float:
    """Mean spacing 2*pi/log(t*q/2*pi) of zeros near height t, floored so it stays finite near 0."""
    return 2 * math.pi / max(math.log(max(t, 1e-12) / (2 * math.pi)) + log_conductor, 1.0)


def scan_grid(start: float, end: float, spacing: Callable[[float], float]) -> np.ndarray:
    """Points start = t_0 < t_1 < ... < t_k = end with t_{i+1} - t_i <= spacing(t_i)."""
    points = [start]
    t = start
    while True:
        t = t + spacing(t)
        if t >= end:
            break
        points.append(t)
    points.append(end)
    return np.array(points)


def refine_root(f: RealFunction, a: float, b: float, xtol: float) -> float:
    return float(optimize.brentq(f, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200))


def sign_change_zeros(f: RealFunction, grid: Sequence[float], xtol: float,
                      values: Optional[Sequence[float]] = None) -> List[float]:
    """One refined zero per sign change of f between consecutive grid points."""
    ts = list(grid)
    fs = list(values) if values is not None else [f(t) for t in ts]
    zeros = []
    for i in range(len(ts) - 1):
        fa, fb = fs[i], fs[i + 1]
        if fa == 0.0:
            if i > 0:
                zeros.append(ts[i])
            continue
        if fa * fb < 0:
            zeros.append(refine_root(f, ts[i], ts[i + 1], xtol))
    return zeros


def scan_window(f: RealFunction, start: float, end: float, expected: int,
                gap: Callable[[float], float], xtol: float,
                fraction: float = config.ZERO_GRID_FRACTION,
                max_refinements: int = config.ZERO_MAX_REFINEMENTS) -> WindowResult:
    """
    Locate the zeros of a real function on [start, end).

    The grid spacing starts at `fraction` of the mean gap and halves until the
    number of sign changes equals `expected` or the refinement budget is spent.

    Args:
        f: Real-valued function whose zeros are wanted
        start: Left end of the window
        end: Right end of the window
        expected: Zero count certified by the argument principle
        gap: Mean zero spacing as a function of height
        xtol: Absolute tolerance of each refined zero

    Returns:
        WindowResult holding the zeros and whether the count matched
    """
    zeros: List[float] = []
    for level in range(max_refinements + 1):
        step = fraction / (2 ** level)
        grid = scan_grid(start, end, lambda t: step * gap(t))
        zeros = sign_change_zeros(f, grid, xtol)
        if len(zeros) == expected:
            return WindowResult(start, end, zeros, expected, True, level)
        logger.debug(f"Window [{start:.4f}, {end:.4f}]: {len(zeros)} sign changes, "
                     f"expected {expected}; refining")
    logger.warning(f"Window [{start:.4f}, {end:.4f}] unresolved: {len(zeros)} zeros found, "
                   f"{expected} expected after {max_refinements} refinements")
    return WindowResult(start, end, zeros, expected, False, max_refinements)


def arg_variation(g: Callable[[float], complex], sigma_start: float, sigma_end: float,
                  max_jump: float = math.pi / 4, initial_steps: int = 16,
                  min_step: float = 1e-9) -> float:
    """
    Continuous argument of g(sigma_end), tracked from the principal value at
    sigma_start along the horizontal segment between them.

    Steps are halved until every increment of the argument is below max_jump.
    """
    value = g(sigma_start)
    arg = math.atan2(value.imag, value.real)
    sigma = sigma_start
    step = (sigma_end - sigma_start) / initial_steps
    while sigma != sigma_end:
        target = sigma_end if abs(step) >= abs(sigma_end - sigma) else sigma + step
        nxt = g(target)
        jump = math.atan2((nxt / value).imag, (nxt / value).real)
        if abs(jump) > max_jump:
            step = (target - sigma) / 2
            if abs(step) < min_step:
                raise PrecisionError(f"argument jumps by {jump:.3f} over a step below {min_step}", abs(step))
            continue
        arg += jump
        sigma = target
        value = nxt
        step *= 1.5
    return arg


def split_windows(start: float, end: float, density: Callable[[float], float],
                  zeros_per_window: int = config.ZERO_WINDOW_ZEROS) -> List[Tuple[float, float]]:
    """Cut [start, end] into consecutive windows each holding about zeros_per_window zeros."""
    windows = []
    a = start
    while a < end:
        b = min(end, a + zeros_per_window / max(density(a), 1e-12))
        if end - b < 0.25 * (b - a):
            b = end
        windows.append((a, b))
        a = b
    return windows


def nudged_count(count_value: Callable[[float], float], x: float, gap: float,
                 shifts: Sequence[float] = (0.0, 0.013, -0.029, 0.041, -0.057),
                 slack: float = 0.25) -> Tuple[float, int]:
    """
    (x', n): the continuous count rounded at a point x' near x where it sits
    within `slack` of an integer. x' moves by small fractions of the mean gap
    until the count is clean.
    """
    worst = 0.0
    for shift in shifts:
        xn = x + shift * gap
        try:
            value = count_value(xn)
        except PrecisionError:
            continue
        n = round(value)
        if abs(value - n) <= slack:
            return xn, int(n)
        worst = max(worst, abs(value - n))
        logger.debug(f"Count at {xn:.6f} is {value:.4f}; moving off a nearby ordinate")
    raise PrecisionError(f"could not certify the zero count near {x}", worst)
