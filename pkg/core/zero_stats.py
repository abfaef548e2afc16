"""Binned statistics of zero ordinates and their discrepancy against prediction curves."""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

import config
from core.errors import DomainError, IncompletenessError, ValidationError
from core.zeta import ZeroList
from predict.prediction import PredictionCurve

logger = logging.getLogger(__name__)

Family = Union[Dict[int, ZeroList], Iterable[Tuple[int, ZeroList]]]

_BIN_SAMPLES = 9


@dataclass(frozen=True, eq=False)
class Histogram:
    """
    Weighted counts on the half-open bins [origin + k*bin_width, origin + (k+1)*bin_width).

    `counts` are already divided by `normalization`; `total_weight` is the raw
    weight that landed in range.
    """

    bin_width: float
    origin: float
    counts: np.ndarray
    normalization: float
    label: str = ""
    total_weight: float = 0.0
    metadata: Dict = field(default_factory=dict)

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.float64)
        if not self.bin_width > 0:
            raise ValidationError(f"bin width must be positive, got {self.bin_width}")
        if not self.normalization > 0:
            raise ValidationError(f"normalization must be positive, got {self.normalization}")
        if not np.all(np.isfinite(counts)) or np.any(counts < 0):
            raise DomainError(f"histogram {self.label!r} has negative or non-finite counts")
        object.__setattr__(self, 'counts', counts)

    def __len__(self) -> int:
        return int(self.counts.size)

    @property
    def edges(self) -> np.ndarray:
        return self.origin + self.bin_width * np.arange(len(self) + 1)

    @property
    def centres(self) -> np.ndarray:
        return self.origin + self.bin_width * (np.arange(len(self)) + 0.5)

    @property
    def raw_counts(self) -> np.ndarray:
        return self.counts * self.normalization

    def rows(self) -> List[Tuple[float, float, float]]:
        """(bin_left, bin_right, value) per bin."""
        edges = self.edges.tolist()
        return list(zip(edges[:-1], edges[1:], self.counts.tolist()))


@dataclass(frozen=True)
class Discrepancy:
    l2: float
    max_abs: float
    per_bin: List[float]


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    dof: int
    p_value: float
    passed: bool


@dataclass(frozen=True)
class RunsTestResult:
    """Wald-Wolfowitz runs test on the signs of a deviation sequence."""

    runs: int
    expected_runs: float
    z: float
    p_value: float
    longest_run: int
    passed: bool


def bin_count(bin_width: float, lo: float, hi: float) -> int:
    """Number of bins of the given width covering [lo, hi)."""
    if not hi > lo:
        raise ValidationError(f"empty bin range [{lo}, {hi})")
    return max(1, int(round((hi - lo) / bin_width)))


def _bin(values: np.ndarray, origin: float, bin_width: float, n_bins: int,
         weights: Optional[np.ndarray] = None) -> Tuple[np.ndarray, float]:
    """Half-open binning; values on a boundary go to the right-hand bin."""
    edges = origin + bin_width * np.arange(n_bins + 1)
    index = np.searchsorted(edges, values, side='right') - 1
    inside = (index >= 0) & (index < n_bins)
    w = np.ones(values.shape) if weights is None else weights
    counts = np.bincount(index[inside], weights=w[inside], minlength=n_bins).astype(np.float64)
    return counts, float(w[inside].sum())


def _family_items(family: Family) -> List[Tuple[int, ZeroList]]:
    items = list(family.items()) if isinstance(family, dict) else list(family)
    if not items:
        raise DomainError("one-level density of an empty family")
    return items


def _scale(d: int) -> float:
    return math.log(abs(d)) / (2 * math.pi)


def one_level_density(family: Family, bin_width: float = config.DENSITY_BIN_WIDTH,
                      lo: float = 0.0, hi: float = 20.0, mode: str = 'raw') -> Histogram:
    """
    Family-averaged density of zeros of L(s, chi_d) per unit height.

    Each listed zero gamma stands for the pair +-gamma, and the even test
    function (h(x) + h(-x))/2 puts weight 1/2 + 1/2 on the bin holding gamma
    and on the bin holding -gamma. Counts are divided by |family| * bin_width.
    In 'rescaled' mode ordinates are first multiplied by log|d|/2pi.

    Raises:
        DomainError: empty family
        IncompletenessError: a zero list is not certified to the needed height
    """
    if mode not in ('raw', 'rescaled'):
        raise ValidationError(f"unknown density mode {mode!r}")
    items = _family_items(family)
    n_bins = bin_count(bin_width, lo, hi)
    reach = max(abs(lo), abs(hi))
    counts = np.zeros(n_bins)
    total = 0.0
    for d, zeros in items:
        scale = _scale(d) if mode == 'rescaled' else 1.0
        needed = reach / scale
        if not zeros.complete or zeros.height_bound < needed:
            raise IncompletenessError(
                f"zeros of chi_{d} are certified to {zeros.height_bound:.4f}, need {needed:.4f}",
                partial=zeros)
        gammas = zeros.ordinates * scale
        c, weight = _bin(np.concatenate([gammas, -gammas]), lo, bin_width, n_bins)
        counts += c
        total += weight
    normalization = len(items) * bin_width
    logger.info(f"One-level density ({mode}) over {len(items)} discriminants: "
                f"{total:.0f} weighted zeros in [{lo}, {hi})")
    return Histogram(bin_width, lo, counts / normalization, normalization,
                     label=f"one-level density ({mode})", total_weight=total,
                     metadata={"family_size": len(items), "mode": mode})


def _pair_indices(g: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Index pairs (i, j), i != j, with lo[i] <= g[j] - g[i] < hi[i] up to the window edges."""
    n = g.size
    left = np.searchsorted(g, g + lo, side='left')
    right = np.searchsorted(g, g + hi, side='left')
    sizes = np.maximum(right - left, 0)
    total = int(sizes.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    i = np.repeat(np.arange(n), sizes)
    starts = np.repeat(np.cumsum(sizes) - sizes, sizes)
    j = np.repeat(left, sizes) + (np.arange(total) - starts)
    keep = i != j
    return i[keep], j[keep]


def pair_differences(ordinates: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """All gamma_j - gamma_i, i != j, lying in [lo, hi)."""
    g = np.asarray(ordinates, dtype=np.float64)
    i, j = _pair_indices(g, np.full(g.size, lo), np.full(g.size, hi))
    diffs = g[j] - g[i]
    return diffs[(diffs >= lo) & (diffs < hi)]


def local_zero_density(t: np.ndarray) -> np.ndarray:
    """log(t/2pi)/2pi, the mean number of zeta zeros per unit height at t."""
    return np.log(np.asarray(t, dtype=np.float64) / (2 * math.pi)) / (2 * math.pi)


def pair_correlation(zeros: ZeroList, bin_width: float = config.PAIRCORR_BIN_WIDTH,
                     lo: float = -3.0, hi: float = 3.0, mode: str = 'raw') -> Histogram:
    """
    Histogram of ordered-pair differences gamma_j - gamma_i, i != j.

    'raw' divides counts by the bin width (pairs per unit difference).
    'montgomery' measures each difference in mean spacings at the pair's own
    height, (gamma_j - gamma_i) log(gbar/2pi)/2pi with gbar = (gamma_i + gamma_j)/2,
    and divides by N(T) * bin_width, N(T) the number of zeros.

    Raises:
        DomainError: fewer than 2 zeros, or a zero below 2pi in 'montgomery' mode
    """
    if mode not in ('raw', 'montgomery'):
        raise ValidationError(f"unknown pair-correlation mode {mode!r}")
    if len(zeros) < 2:
        raise DomainError(f"pair correlation needs at least 2 zeros, got {len(zeros)}")
    if not zeros.complete:
        logger.warning(f"Pair correlation over an uncertified list ({zeros.label})")
    n_bins = bin_count(bin_width, lo, hi)
    g = zeros.ordinates
    T = float(g[-1])
    if mode == 'montgomery':
        if g[0] <= 2 * math.pi:
            raise DomainError(f"montgomery scaling needs ordinates above 2pi, got {g[0]}")
        # raw windows wide enough for the density anywhere within reach of gamma_i
        reach = (max(abs(lo), abs(hi)) + bin_width) / float(local_zero_density(g[0]))
        low = local_zero_density(np.maximum(g - reach, g[0]))
        high = local_zero_density(g + reach)
        a, b = lo - bin_width, hi + bin_width
        i, j = _pair_indices(g, np.minimum(a / low, a / high), np.maximum(b / low, b / high))
        diffs = (g[j] - g[i]) * local_zero_density(0.5 * (g[i] + g[j]))
    else:
        diffs = pair_differences(g, lo, hi)
    counts, total = _bin(diffs, lo, bin_width, n_bins)
    normalization = bin_width * (len(zeros) if mode == 'montgomery' else 1)
    logger.info(f"Pair correlation ({mode}) of {len(zeros)} zeros: {total:.0f} pairs in [{lo}, {hi})")
    return Histogram(bin_width, lo, counts / normalization, normalization,
                     label=f"pair correlation ({mode})", total_weight=total,
                     metadata={"zeros": len(zeros), "T": T, "mode": mode,
                               "scale": "local" if mode == 'montgomery' else 1.0})


def bin_averages(hist: Histogram, pred: PredictionCurve) -> np.ndarray:
    """
    The prediction averaged over each bin. A curve sampled exactly at the bin
    centres is taken as already averaged; otherwise it is interpolated at
    evenly spaced points across each bin.

    Raises:
        DomainError: the curve does not cover the histogram's range
    """
    centres = hist.centres
    if len(pred) == len(hist) and np.allclose(pred.abscissae, centres, rtol=0, atol=1e-9 * hist.bin_width):
        return pred.values.copy()
    edges = hist.edges
    tol = 1e-9 * hist.bin_width
    if len(pred) < 2 or pred.abscissae[0] > edges[0] + tol or pred.abscissae[-1] < edges[-1] - tol:
        raise DomainError(f"prediction {pred.label!r} covers [{pred.abscissae[0] if len(pred) else 'nan'}, "
                          f"{pred.abscissae[-1] if len(pred) else 'nan'}], histogram spans "
                          f"[{edges[0]}, {edges[-1]}]")
    offsets = np.linspace(0.0, 1.0, _BIN_SAMPLES)
    points = edges[:-1, None] + hist.bin_width * offsets[None, :]
    samples = np.interp(points.ravel(), pred.abscissae, pred.values).reshape(points.shape)
    return samples.mean(axis=1)


def discrepancy(hist: Histogram, pred: PredictionCurve) -> Discrepancy:
    """Root-mean-square and largest per-bin difference of histogram minus prediction."""
    per_bin = hist.counts - bin_averages(hist, pred)
    return Discrepancy(float(np.sqrt(np.mean(per_bin ** 2))), float(np.max(np.abs(per_bin))),
                       per_bin.tolist())


def chi_square_against_kernel(hist: Histogram, kernel: Callable[[np.ndarray], np.ndarray],
                              lo: Optional[float] = None, hi: Optional[float] = None,
                              significance: float = config.SIGNIFICANCE_LEVEL) -> ChiSquareResult:
    """
    Pearson chi-square of the raw bin counts against normalization times the
    kernel averaged over each bin, using bins inside [lo, hi].
    """
    edges = hist.edges
    lo = edges[0] if lo is None else lo
    hi = edges[-1] if hi is None else hi
    tol = 1e-9 * hist.bin_width
    chosen = (edges[:-1] >= lo - tol) & (edges[1:] <= hi + tol)
    if not chosen.any():
        raise DomainError(f"no bins inside [{lo}, {hi}]")
    offsets = np.linspace(0.0, 1.0, _BIN_SAMPLES)
    points = edges[:-1][chosen, None] + hist.bin_width * offsets[None, :]
    expected = hist.normalization * np.asarray(kernel(points), dtype=np.float64).mean(axis=1)
    if np.any(expected <= 0):
        raise DomainError("kernel expects a non-positive count in a tested bin")
    observed = hist.raw_counts[chosen]
    statistic = float(np.sum((observed - expected) ** 2 / expected))
    dof = int(chosen.sum())
    p_value = float(stats.chi2.sf(statistic, dof))
    logger.info(f"Chi-square {statistic:.2f} on {dof} bins, p = {p_value:.4f}")
    return ChiSquareResult(statistic, dof, p_value, p_value >= significance)


def sign_runs_test(deviations: Sequence[float],
                   significance: float = config.SIGNIFICANCE_LEVEL) -> RunsTestResult:
    """
    One-sided runs test: too few sign runs means systematic deviation.
    Exact zeros are dropped.
    """
    signs = np.sign(np.asarray(deviations, dtype=np.float64))
    signs = signs[signs != 0]
    n = signs.size
    if n < 2:
        raise DomainError(f"runs test needs at least 2 nonzero deviations, got {n}")
    change = np.flatnonzero(signs[1:] != signs[:-1])
    runs = int(change.size) + 1
    bounds = np.concatenate([[0], change + 1, [n]])
    longest = int(np.max(np.diff(bounds)))
    n_pos = int(np.sum(signs > 0))
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        return RunsTestResult(runs, 1.0, float('-inf'), 0.0, longest, False)
    expected = 2.0 * n_pos * n_neg / n + 1.0
    variance = 2.0 * n_pos * n_neg * (2.0 * n_pos * n_neg - n) / (n * n * (n - 1))
    z = (runs - expected) / math.sqrt(variance) if variance > 0 else 0.0
    p_value = float(stats.norm.cdf(z))
    return RunsTestResult(runs, expected, z, p_value, longest, p_value >= significance)
