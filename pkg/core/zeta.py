"""
Riemann zeta by Euler-Maclaurin summation, Hardy's Z, and a certified zero finder.
"""
import cmath
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import integrate, optimize, special

import config
from core.errors import (ConsistencyError, DomainError, IncompletenessError, PoleError,
                         PrecisionError, ValidationError)
from core.special import ComplexEval, loggamma, trigamma
from core.zero_scan import (WindowResult, arg_variation, mean_gap, nudged_count, scan_window,
                             split_windows)

logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps
_BERNOULLI = special.bernoulli(2 * config.ZETA_MAX_BERNOULLI)
# B_{2j} / (2j)!
_EM_COEFFS = [float(_BERNOULLI[2 * j]) / math.factorial(2 * j)
              for j in range(1, config.ZETA_MAX_BERNOULLI + 1)]


@dataclass(frozen=True, eq=False)
class ZeroList:
    """Ascending zero ordinates up to height_bound."""

    ordinates: np.ndarray
    height_bound: float
    complete: bool
    source: str = "computed"
    label: str = "zeta"
    metadata: Dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        ords = np.asarray(self.ordinates, dtype=np.float64)
        if ords.size > 1 and np.any(np.diff(ords) <= 0):
            raise ValidationError(f"zero ordinates for {self.label} are not strictly ascending")
        if self.source not in ("computed", "imported"):
            raise ValidationError(f"unknown zero-list source {self.source!r}")
        ords.setflags(write=False)
        object.__setattr__(self, 'ordinates', ords)

    def __len__(self) -> int:
        return int(self.ordinates.size)

    def __iter__(self):
        return iter(self.ordinates.tolist())

    def up_to(self, T: float) -> "ZeroList":
        k = int(np.searchsorted(self.ordinates, T, side='right'))
        return ZeroList(self.ordinates[:k].copy(), min(T, self.height_bound), self.complete,
                        self.source, self.label, dict(self.metadata))

    def first(self, count: int) -> "ZeroList":
        """First `count` ordinates; the height bound moves to the gap after the last kept zero."""
        if count > len(self):
            raise DomainError(f"{self.label}: asked for {count} zeros, list holds {len(self)}")
        ords = self.ordinates[:count]
        if count < len(self):
            bound = 0.5 * (self.ordinates[count - 1] + self.ordinates[count])
        else:
            bound = self.height_bound
        return ZeroList(ords.copy(), float(bound), self.complete, self.source, self.label,
                        dict(self.metadata))


@lru_cache(maxsize=8)
def _log_table(N: int) -> np.ndarray:
    table = np.log(np.arange(1, N, dtype=np.float64))
    table.setflags(write=False)
    return table


def _polynomial_step(P: complex, dP: complex, d2P: complex, f: complex) -> Tuple[complex, complex, complex]:
    """Multiply (P, P', P'') by the linear factor f(s) = s + const."""
    return P * f, dP * f + P, d2P * f + 2 * dP


def _euler_maclaurin(s: complex, N: int, order: int, tol: float) -> Optional[Tuple[complex, float]]:
    """(value, error bound) of the order-th derivative of zeta at s, or None when the tail diverges at this N."""
    logs = _log_table(N)
    terms = np.exp(-s * logs)
    if order:
        terms = terms * (-logs) ** order
    head = complex(terms.sum())
    rounding = 4 * _EPS * float(np.abs(terms).sum())

    L = math.log(N)
    n_s = cmath.exp(-s * L)
    u = 1.0 / (s - 1.0)
    if order == 0:
        integral = N * n_s * u
    elif order == 1:
        integral = N * n_s * (-L * u - u * u)
    else:
        integral = N * n_s * (L * L * u + 2 * L * u * u + 2 * u ** 3)
    value = head + integral + (-L) ** order * n_s / 2

    P, dP, d2P = 0j, 0j, 0j
    power = N * n_s
    previous = math.inf
    sigma = s.real
    for j, coeff in enumerate(_EM_COEFFS, start=1):
        if j == 1:
            P, dP, d2P = s, 1.0 + 0j, 0j
        else:
            P, dP, d2P = _polynomial_step(P, dP, d2P, s + 2 * j - 3)
            P, dP, d2P = _polynomial_step(P, dP, d2P, s + 2 * j - 2)
        power /= N * N
        if order == 0:
            term = coeff * power * P
        elif order == 1:
            term = coeff * power * (dP - L * P)
        else:
            term = coeff * power * (d2P - 2 * L * dP + L * L * P)
        size = abs(term)
        if j > 2 and size > previous:
            return None
        value += term
        if size < tol:
            factor = abs(s + 2 * j + 1) / max(sigma + 2 * j + 1, 1.0)
            bound = size * factor * (1 + L) ** order + rounding + _EPS * abs(value)
            return value, bound
        previous = size
    return None


def zeta(s: complex, derivative: int = 0, N: Optional[int] = None,
         tol: float = config.ZETA_TOLERANCE) -> ComplexEval:
    """
    zeta(s), zeta'(s) or zeta''(s) by Euler-Maclaurin summation.

    Args:
        s: Point of evaluation (s != 1)
        derivative: 0, 1 or 2
        N: Number of explicitly summed terms; chosen from |Im s| when None
        tol: Size below which the correction series stops

    Returns:
        ComplexEval with a conservative absolute error bound
    """
    s = complex(s)
    if s == 1:
        raise PoleError("zeta has a pole at s = 1")
    if derivative not in (0, 1, 2):
        raise ValidationError(f"derivative order must be 0, 1 or 2, got {derivative}")
    if abs(s.imag) > config.ZETA_MAX_HEIGHT:
        raise DomainError(f"|Im s| = {abs(s.imag):g} exceeds {config.ZETA_MAX_HEIGHT:g}")
    if N is None:
        N = 10 + int(abs(s.imag) / math.pi) + int(max(0.0, -s.real))
    for _ in range(6):
        result = _euler_maclaurin(s, N, derivative, tol)
        if result is not None:
            return ComplexEval(*result)
        N *= 2
    raise PrecisionError(f"Euler-Maclaurin did not converge at s = {s}")


def zeta_logderiv(s: complex) -> ComplexEval:
    """zeta'(s)/zeta(s)."""
    z0 = zeta(s)
    if abs(z0.value) <= max(z0.abs_error_bound, 1e-300):
        raise PoleError(f"zeta vanishes at s = {s} to working precision")
    return zeta(s, 1) / z0


def zeta_logderiv_prime(s: complex) -> ComplexEval:
    """(zeta'/zeta)'(s) = zeta''/zeta - (zeta'/zeta)^2."""
    z0 = zeta(s)
    if abs(z0.value) <= max(z0.abs_error_bound, 1e-300):
        raise PoleError(f"zeta vanishes at s = {s} to working precision")
    ratio = zeta(s, 1) / z0
    return zeta(s, 2) / z0 - ratio * ratio


def _pair_term(s: complex, gamma: float) -> complex:
    """(s - rho)^-2 + (s - conj rho)^-2 for rho = 1/2 + i gamma."""
    return (s - 0.5 - 1j * gamma) ** -2 + (s - 0.5 + 1j * gamma) ** -2


def zero_sum_logderiv_prime(s: complex, zeros: ZeroList) -> ComplexEval:
    """
    (zeta'/zeta)'(s) from the Hadamard product:
    (s-1)^-2 - psi'(s/2+1)/4 - sum over zeros of (s-rho)^-2.

    Zeros above the list's height bound enter through the smooth density
    log(gamma/2 pi)/2 pi; the error bound covers the fluctuation around it.
    """
    s = complex(s)
    if len(zeros) == 0:
        raise DomainError("zero sum needs at least one zero")
    gammas = zeros.ordinates
    finite = complex(np.sum((s - 0.5 - 1j * gammas) ** -2 + (s - 0.5 + 1j * gammas) ** -2))
    H = max(zeros.height_bound, float(gammas[-1]))

    def density(g: float) -> float:
        return math.log(g / (2 * math.pi)) / (2 * math.pi)

    re_tail, re_err = integrate.quad(lambda g: density(g) * _pair_term(s, g).real, H, np.inf, limit=200)
    im_tail, im_err = integrate.quad(lambda g: density(g) * _pair_term(s, g).imag, H, np.inf, limit=200)
    fluctuation = 2 * math.log(H) * abs(_pair_term(s, H))
    head = (s - 1) ** -2 - trigamma(s / 2 + 1) / 4
    value = head - finite - complex(re_tail, im_tail)
    return ComplexEval(value.value, value.abs_error_bound + re_err + im_err + fluctuation
                       + 8 * _EPS * len(zeros))


def riemann_siegel_theta(t: float) -> float:
    """theta(t) = Im log Gamma(1/4 + i t/2) - (t/2) log pi."""
    return loggamma(0.25 + 0.5j * t).imag - 0.5 * t * math.log(math.pi)


def zeta_chi(s: complex) -> complex:
    """Factor in zeta(s) = chi(s) zeta(1 - s)."""
    s = complex(s)
    log_chi = ((s - 0.5) * math.log(math.pi) + loggamma((1 - s) / 2).value
               - loggamma(s / 2).value)
    return cmath.exp(log_chi)


def hardy_Z_zeta(t: float) -> float:
    """Z(t) = exp(i theta(t)) zeta(1/2 + i t), real for real t."""
    t = float(t)
    rotated = cmath.exp(1j * riemann_siegel_theta(t)) * zeta(0.5 + 1j * t).value
    if abs(rotated.imag) > config.HARDY_Z_RESIDUE_TOLERANCE:
        raise ConsistencyError(f"Z({t}) has imaginary residue {rotated.imag:.3g}")
    if abs(rotated.imag) > config.ZETA_RESIDUE_TOLERANCE:
        logger.warning(f"Z({t}) imaginary residue {rotated.imag:.3g} above {config.ZETA_RESIDUE_TOLERANCE}")
    return rotated.real


def zeta_count_function(T: float) -> float:
    """theta(T)/pi + 1 + arg zeta(1/2 + iT)/pi, the continuous form of N(T)."""
    arg = arg_variation(lambda sigma: zeta(complex(sigma, T)).value, config.ARG_START_SIGMA, 0.5)
    return riemann_siegel_theta(T) / math.pi + 1 + arg / math.pi


def zeta_zero_count(T: float) -> int:
    """
    Number of zeros with 0 < gamma <= T by the argument principle.

    Raises:
        PrecisionError: T sits too close to an ordinate for the count to round cleanly
    """
    if T <= 0:
        return 0
    value = zeta_count_function(T)
    n = round(value)
    if abs(value - n) > 0.25:
        raise PrecisionError(f"zero count at T={T} is not near an integer ({value:.4f})", abs(value - n))
    return int(n)


def _certified_count(T: float) -> Tuple[float, int]:
    """(T', N(T')) with T' nudged off any nearby ordinate."""
    return nudged_count(zeta_count_function, T, mean_gap(T))


def _zeta_density(t: float) -> float:
    return max(math.log(max(t, 1.0) / (2 * math.pi)), 1.0) / (2 * math.pi)


def _zeta_window(start: float, end: float, expected: int) -> WindowResult:
    return scan_window(hardy_Z_zeta, start, end, expected, mean_gap, config.ZETA_ZERO_TOLERANCE)


def _height_for_count(count: int) -> float:
    """Height where the smooth count (T/2pi) log(T/2pi e) + 7/8 reaches count + 1."""
    def smooth(T):
        return T / (2 * math.pi) * math.log(T / (2 * math.pi * math.e)) + 7 / 8 - (count + 1)
    return float(optimize.brentq(smooth, 2 * math.pi * math.e, 1e9))


def zeta_zeros(T: Optional[float] = None, count: Optional[int] = None,
               parallelism: int = 1) -> ZeroList:
    """
    Zeros of zeta on the critical line, up to height T or the first `count`.

    Args:
        T: Height bound
        count: Number of zeros wanted (used when T is None)
        parallelism: Worker processes for the window scans

    Returns:
        ZeroList certified complete against the argument-principle count

    Raises:
        IncompletenessError: a window count stayed unresolved; the partial
            list rides on the exception
    """
    if T is None and count is None:
        raise ValidationError("zeta_zeros needs a height T or a count")
    if count is not None and T is None:
        if count < 1:
            raise ValidationError(f"count must be positive, got {count}")
        height = _height_for_count(count)
        while True:
            found = zeta_zeros(T=height, parallelism=parallelism)
            if len(found) > count:
                return found.first(count)
            height *= 1.1
    if not 0 < T <= config.ZETA_MAX_HEIGHT:
        raise DomainError(f"height {T} outside (0, {config.ZETA_MAX_HEIGHT:g}]")

    T, total = _certified_count(T)
    logger.info(f"Finding {total} zeta zeros up to T={T:.6f}")
    windows = []
    previous_count = 0
    for a, b in split_windows(0.0, T, _zeta_density):
        if b < T:
            b, n_b = _certified_count(b)
        else:
            n_b = total
        windows.append((a if not windows else windows[-1][1], b, n_b - previous_count))
        previous_count = n_b

    if parallelism > 1 and len(windows) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            futures = [pool.submit(_zeta_window, a, b, n) for a, b, n in windows]
            results = [f.result() for f in futures]
    else:
        results = [_zeta_window(a, b, n) for a, b, n in windows]

    ordinates = np.array(sorted(z for r in results for z in r.zeros), dtype=np.float64)
    complete = all(r.matched for r in results) and ordinates.size == total
    zl = ZeroList(ordinates, float(T), complete, "computed", "zeta",
                  {"windows": len(windows), "refinements": sum(r.refinements for r in results)})
    if not complete:
        bad = [(round(r.start, 4), round(r.end, 4)) for r in results if not r.matched]
        raise IncompletenessError(f"zeta zero count unresolved in windows {bad}", partial=zl)
    logger.info(f"Certified {len(zl)} zeta zeros up to T={T:.6f}")
    return zl


# Zero tables

def write_zero_table(zeros: ZeroList, path: Path) -> Path:
    """One ordinate per line, ascending."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        for g in zeros.ordinates.tolist():
            f.write(f"{g:.12f}\n")
    return path


def sidecar_path(path: Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def export_zero_list(zeros: ZeroList, path: Path, metadata: Optional[Dict] = None) -> List[Path]:
    """Write the ordinate table and its JSON sidecar (label, height bound, completeness)."""
    table = write_zero_table(zeros, path)
    info = {
        "label": zeros.label,
        "height_bound": zeros.height_bound,
        "complete": zeros.complete,
        "source": zeros.source,
        "count": len(zeros),
    }
    info.update(zeros.metadata)
    if metadata:
        info.update(metadata)
    side = sidecar_path(path)
    with open(side, 'w') as f:
        json.dump(info, f, indent=2, sort_keys=True, default=str)
    logger.info(f"Exported {len(zeros)} zeros of {zeros.label} to {table}")
    return [table, side]


def read_zero_table(path: Path, label: str = "zeta", height_bound: Optional[float] = None,
                    complete: Optional[bool] = None) -> ZeroList:
    """
    Load a plain-text table of ordinates (one per line, '#' comments allowed).

    A JSON sidecar, when present, supplies the height bound and completeness;
    otherwise the table is taken as complete up to its last ordinate.
    """
    path = Path(path)
    values = []
    with open(path, 'r') as f:
        for lineno, line in enumerate(f, start=1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            try:
                values.append(float(line.split()[0]))
            except ValueError as e:
                raise ValidationError(f"{path}:{lineno}: not an ordinate: {line!r}") from e
    info = {}
    side = sidecar_path(path)
    if side.exists():
        with open(side, 'r') as f:
            info = json.load(f)
    if height_bound is None:
        height_bound = float(info.get("height_bound", values[-1] if values else 0.0))
    if complete is None:
        complete = bool(info.get("complete", True))
    logger.info(f"Read {len(values)} ordinates from {path}")
    return ZeroList(np.array(values), height_bound, complete, "imported", info.get("label", label))
