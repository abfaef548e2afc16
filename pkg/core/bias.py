"""Prime-sum statistics of a(p): S_E(x), the logarithmic bias mean and explicit-formula residuals."""
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

import config
from core.errors import DependencyError, DomainError
from core.zeta import ZeroList
from curves.ap_table import APTable, ap_table
from curves.coefficients import symmetric_square_coeff
from curves.weierstrass import WeierstrassCurve

logger = logging.getLogger(__name__)


@dataclass
class BiasReport:
    """Bias statistics of one curve up to X."""

    curve_id: str
    X: int
    bias_mean: float
    S_samples: List[Tuple[float, float, float]] = field(default_factory=list)
    rank: Optional[int] = None
    S_at_X: float = 0.0
    symmetric_square: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.bias_mean):
            raise DomainError(f"bias mean for {self.curve_id} is not finite")
        xs = [x for x, _, _ in self.S_samples]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise DomainError("checkpoints must be strictly ascending in x")

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["S_samples"] = [{"x": x, "S_E": s, "bias_to_date": b} for x, s, b in self.S_samples]
        return data


@dataclass(frozen=True)
class ExplicitFormulaResidual:
    x: float
    lhs: float
    prediction: float
    residual: float
    zeros_used: int
    height: float


def _prime_slice(table: APTable, x: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    table.require(x)
    k = int(np.searchsorted(table.primes, x, side='right'))
    return table.primes[:k], table.values[:k], table.bad[:k]


def S_E(table: APTable, x: float) -> float:
    """sum_{p <= x} log(p) a(p), compensated."""
    if x < 2:
        return 0.0
    primes, values, _ = _prime_slice(table, x)
    return math.fsum((np.log(primes.astype(np.float64)) * values).tolist())


def bias_mean(table: APTable, X: float) -> float:
    """
    (1/log X) * integral_1^X S_E(x) x^-2 dx.

    S_E is a step function jumping by log(p) a(p) at each prime, so the
    integral is sum_{p <= X} log(p) a(p) (1/p - 1/X).
    """
    if X < 2:
        raise DomainError(f"bias mean needs X >= 2, got {X}")
    primes, values, _ = _prime_slice(table, X)
    p = primes.astype(np.float64)
    terms = np.log(p) * values * (1.0 / p - 1.0 / X)
    return math.fsum(terms.tolist()) / math.log(X)


def geometric_checkpoints(X: float, ratio: float = config.CHECKPOINT_RATIO, start: float = 2.0) -> np.ndarray:
    """start, start*ratio, start*ratio^2, ... below X, then X."""
    if X < start:
        return np.array([float(X)])
    count = int(math.floor(math.log(X / start) / math.log(ratio))) + 1
    points = start * ratio ** np.arange(count)
    points = points[points < X]
    return np.append(points, float(X))


def S_E_checkpoints(table: APTable, X: float,
                    ratio: float = config.CHECKPOINT_RATIO) -> List[Tuple[float, float, float]]:
    """(x, S_E(x), bias mean up to x) on a geometric grid."""
    primes, values, _ = _prime_slice(table, X)
    p = primes.astype(np.float64)
    weighted = np.log(p) * values
    running = np.cumsum(weighted)
    running_over_p = np.cumsum(weighted / p)
    samples = []
    for x in geometric_checkpoints(X, ratio).tolist():
        k = int(np.searchsorted(primes, x, side='right'))
        if k == 0:
            samples.append((x, 0.0, 0.0))
            continue
        s = float(running[k - 1])
        samples.append((x, s, (float(running_over_p[k - 1]) - s / x) / math.log(x)))
    return samples


def symmetric_square_terms(table: APTable, y: float) -> Tuple[np.ndarray, np.ndarray]:
    """(p, c(p^2)) for p <= y, where c(p^2) = log(p)(alpha^2 + beta^2)."""
    primes, values, bad = _prime_slice(table, y)
    p = primes.astype(np.float64)
    u = values.astype(np.float64) ** 2 / p
    power_sum = np.where(bad, u, u - 2.0)
    return primes, np.log(p) * power_sum


def symm_square_partial(table: APTable, x: float) -> Tuple[float, float]:
    """
    sum_{p <= sqrt(x)} c(p^2) and its ratio to -sqrt(x).

    Returns:
        (partial sum, ratio)
    """
    root = math.sqrt(x)
    if root < 2:
        return 0.0, 0.0
    _, terms = symmetric_square_terms(table, root)
    total = math.fsum(terms.tolist())
    return total, total / -root


def _zero_sum(x: float, gammas: np.ndarray) -> float:
    """sum over zero pairs of (x^rho/rho + x^conj(rho)/conj(rho)), divided by sqrt(x)."""
    rho = 0.5 + 1j * gammas
    return float(np.sum(2 * np.real(np.exp(1j * gammas * math.log(x)) / rho)))


def explicit_formula_check(table: APTable, x: float, zeros: ZeroList,
                           rank: int) -> ExplicitFormulaResidual:
    """
    Compare sum_{p <= x} log(p) a(p)/sqrt(p) with
    -(2r - 1) sqrt(x) - sum_{rho != 1/2} x^rho/rho over the listed zeros.

    Returns:
        The residual (lhs - prediction)/sqrt(x) with its ingredients
    """
    if len(zeros) == 0:
        raise DependencyError(f"explicit formula for {table.curve_id} needs at least one zero")
    primes, values, _ = _prime_slice(table, x)
    p = primes.astype(np.float64)
    lhs = math.fsum((np.log(p) * values / np.sqrt(p)).tolist())
    root = math.sqrt(x)
    prediction = -(2 * rank - 1) * root - root * _zero_sum(x, zeros.ordinates)
    return ExplicitFormulaResidual(x, lhs, prediction, (lhs - prediction) / root,
                                   len(zeros), float(zeros.ordinates[-1]))


def explicit_formula_sweep(table: APTable, xs: Sequence[float], zeros: ZeroList,
                           rank: int) -> List[ExplicitFormulaResidual]:
    return [explicit_formula_check(table, x, zeros, rank) for x in xs]


def bias_report(curve: WeierstrassCurve, X: int, cache_dir: Optional[Path] = None,
                parallelism: int = 1, accelerate: bool = True,
                show_progress: Optional[bool] = None,
                ratio: float = config.CHECKPOINT_RATIO) -> BiasReport:
    """
    Build the a(p) table to X and collect the bias statistics of a curve.

    Args:
        curve: Curve to analyse
        X: Prime bound
        cache_dir: a(p) cache directory
        parallelism: Worker processes for point counting
        accelerate: Use baby-step/giant-step for large primes
        show_progress: Force the progress bar on or off
        ratio: Ratio of the geometric checkpoint grid

    Returns:
        BiasReport
    """
    if X < 2:
        raise DomainError(f"bias report needs X >= 2, got {X}")
    logger.info(f"Bias report for {curve.name} up to X={X}")
    table = ap_table(curve, X, cache_dir=cache_dir, accelerate=accelerate,
                     parallelism=parallelism, show_progress=show_progress)
    samples = S_E_checkpoints(table, X, ratio)
    sym_value, sym_ratio = symm_square_partial(table, X)
    report = BiasReport(
        curve_id=curve.name,
        X=int(X),
        bias_mean=bias_mean(table, X),
        S_samples=samples,
        rank=curve.rank,
        S_at_X=S_E(table, X),
        symmetric_square={
            "x": float(X),
            "partial_sum": sym_value,
            "ratio_to_minus_sqrt_x": sym_ratio,
            "coefficients": {str(p): symmetric_square_coeff(table, p)
                             for p in table.primes[table.primes <= 50].tolist()},
        },
    )
    logger.info(f"{curve.name}: bias mean {report.bias_mean:.4f} at X={X}")
    return report
