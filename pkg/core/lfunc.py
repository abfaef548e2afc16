"""
Smoothed approximate functional equation for self-dual L-functions with one
gamma factor: elliptic curves (degree 2) and real Dirichlet characters (degree 1).

The completed function is Lambda(s) = Q^s Gamma(kappa s + lam) L(s) = w Lambda(1 - s).
Everything on the critical line is evaluated in a form scaled by |Gamma(kappa s + lam)|
so that heights where Lambda underflows stay usable.
"""
import cmath
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

import config
from arith.characters import character_values, is_fundamental_discriminant
from core.errors import (ConsistencyError, DependencyError, DomainError, IncompletenessError,
                         InferenceError, PrecisionError, ValidationError)
from core.special import ComplexEval, digamma, inc_gamma_upper_array, loggamma
from core.zero_scan import WindowResult, arg_variation, nudged_count, scan_window, split_windows
from core.zeta import ZeroList
from curves.ap_table import ap_table
from curves.coefficients import dirichlet_coeffs
from curves.weierstrass import WeierstrassCurve

logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps


# Coefficient sources

class ArrayCoefficients:
    """A fixed coefficient vector b(0..bound)."""

    def __init__(self, values: np.ndarray, label: str = "array"):
        self.values = np.asarray(values, dtype=np.float64)
        self.label = label

    @property
    def bound(self) -> int:
        return self.values.size - 1

    def __call__(self, M: int) -> np.ndarray:
        if M > self.bound:
            raise DependencyError(f"{self.label}: coefficients known to n = {self.bound}, need {M}")
        return self.values[:M + 1]


class CurveCoefficients:
    """b(n) = a(n)/sqrt(n) of an elliptic curve, extended on demand from the a(p) cache."""

    def __init__(self, curve: WeierstrassCurve, cache_dir: Optional[Path] = None,
                 accelerate: bool = True, bound: Optional[int] = None):
        self.curve = curve
        self.cache_dir = cache_dir
        self.accelerate = accelerate
        self.bound = bound
        self._values = np.zeros(1)

    def __call__(self, M: int) -> np.ndarray:
        if self.bound is not None and M > self.bound:
            raise DependencyError(
                f"{self.curve.name}: coefficients limited to n = {self.bound}, need {M}")
        if self._values.size <= M:
            size = max(M, 2 * (self._values.size - 1), 2)
            if self.bound is not None:
                size = min(size, self.bound)
            table = ap_table(self.curve, size, cache_dir=self.cache_dir, accelerate=self.accelerate)
            self._values = dirichlet_coeffs(table, size)
        return self._values[:M + 1]


class CharacterCoefficients:
    """b(n) = chi_d(n)."""

    def __init__(self, d: int):
        self.d = d
        self._values = np.zeros(1)

    def __call__(self, M: int) -> np.ndarray:
        if self._values.size <= M:
            size = max(M, 2 * (self._values.size - 1), 16)
            self._values = character_values(self.d, size).astype(np.float64)
        return self._values[:M + 1]


@dataclass(frozen=True, eq=False)
class SelfDualLSpec:
    """
    Data of Lambda(s) = Q^s Gamma(kappa s + lam) L(s) with L(s) = sum b(n) n^-s.

    kappa and lam are the gamma scale and shift; w is the root number, None
    until inferred.
    """

    Q: float
    kappa: float
    lam: float
    w: Optional[int]
    coefficients: object
    label: str
    conductor: Optional[int] = None

    def __post_init__(self):
        if not self.Q > 0:
            raise ValidationError(f"{self.label}: Q must be positive, got {self.Q}")
        if self.w is not None and self.w not in (1, -1):
            raise ValidationError(f"{self.label}: root number must be +1 or -1, got {self.w}")
        if self.kappa not in (0.5, 1.0):
            raise ValidationError(f"{self.label}: gamma scale must be 1/2 or 1, got {self.kappa}")

    @property
    def degree(self) -> int:
        return int(round(2 * self.kappa))

    def with_root_number(self, w: int) -> "SelfDualLSpec":
        return replace(self, w=w)

    def require_w(self) -> int:
        if self.w is None:
            raise ValidationError(f"{self.label}: root number unknown; infer it first")
        return self.w


@dataclass(frozen=True, eq=False)
class LZeroList(ZeroList):
    """Zeros of L(1/2 + it), 0 < t <= height_bound, owned by a spec."""

    spec: Optional[SelfDualLSpec] = field(default=None, repr=False)


def curve_spec(curve: WeierstrassCurve, bound: Optional[int] = None,
               cache_dir: Optional[Path] = None, infer: bool = True) -> SelfDualLSpec:
    """
    Spec of L(E, s): Q = sqrt(N)/2pi, Gamma(s + 1/2), b(n) = a(n)/sqrt(n).

    Args:
        curve: Curve with a known conductor
        bound: Largest n whose coefficient may be used; None extends on demand
        cache_dir: a(p) cache directory
        infer: Infer the root number when the curve does not carry one
    """
    if curve.conductor is None:
        raise ValidationError(f"{curve.name}: the L-function needs the conductor")
    if curve.conductor > config.MAX_AFE_CONDUCTOR:
        raise DomainError(f"{curve.name}: conductor {curve.conductor} is beyond the "
                          f"AFE limit {config.MAX_AFE_CONDUCTOR:g}")
    coeffs = CurveCoefficients(curve, cache_dir=cache_dir)
    if bound is not None:
        coeffs = ArrayCoefficients(coeffs(bound), label=curve.name)
    spec = SelfDualLSpec(Q=math.sqrt(curve.conductor) / (2 * math.pi), kappa=1.0, lam=0.5,
                         w=curve.root_number, coefficients=coeffs, label=curve.name,
                         conductor=curve.conductor)
    if spec.w is None and infer:
        spec = spec.with_root_number(infer_root_number(spec))
    return spec


def quadratic_spec(d: int) -> SelfDualLSpec:
    """Spec of L(s, chi_d): Q = sqrt(|d|/pi), Gamma((s + a)/2) with a = 0 for d > 0, 1 for d < 0."""
    if d == 1 or not is_fundamental_discriminant(d):
        raise ValidationError(f"{d} is not a fundamental discriminant other than 1")
    a = 0 if d > 0 else 1
    return SelfDualLSpec(Q=math.sqrt(abs(d) / math.pi), kappa=0.5, lam=a / 2, w=1,
                         coefficients=CharacterCoefficients(d), label=f"chi_{d}", conductor=abs(d))


# Evaluation

def smoothing_parameter(u: float, modulus: float = 1.0) -> complex:
    """
    delta = modulus * exp(i sgn(u) (pi/2 - eps)) for the scaled height u = kappa t,
    with eps = digits*log(10)/|u| capped at pi/2.

    The rotation keeps the summands within about 10^digits of the result.
    """
    if u == 0:
        return complex(modulus)
    eps = min(math.pi / 2, config.AFE_CANCELLATION_DIGITS * math.log(10) / abs(u))
    return modulus * cmath.exp(1j * math.copysign(math.pi / 2 - eps, u))


def _delta_for(spec: SelfDualLSpec, s: complex, modulus: float = 1.0) -> complex:
    return smoothing_parameter(spec.kappa * s.imag, modulus)


def truncation_bound(spec: SelfDualLSpec, s: complex, delta: complex,
                     tol: float = config.AFE_TOLERANCE) -> int:
    """
    Number of terms after which every summand, and their sum, is below tol
    relative to the gamma scale. Uses |Gamma(a, x)| ~ |x^(a-1)| e^(-Re x) on a
    bisection in y = (n/Q)^(1/kappa).
    """
    a1 = spec.kappa * s + spec.lam
    a2 = spec.kappa * (1 - s) + spec.lam
    log_scale = loggamma(a1).real
    modulus, phi = abs(delta), cmath.phase(delta)
    target = math.log(tol) - 4.0

    def log_tail(y: float) -> float:
        ly = math.log(y)
        log_qn = -spec.kappa * ly
        t1 = (s.real * log_qn + (a1.real - 1) * (ly + math.log(modulus)) - a1.imag * phi
              - y * modulus * math.cos(phi))
        t2 = ((1 - s.real) * log_qn + (a2.real - 1) * (ly - math.log(modulus)) + a2.imag * phi
              - y * math.cos(phi) / modulus)
        return max(t1, t2) - log_scale + math.log(spec.Q) + spec.kappa * ly

    lo = max(1.0, 2 * abs(a1) / modulus, 2 * abs(a2) * modulus)
    hi = lo
    for _ in range(200):
        if log_tail(hi) < target:
            break
        lo, hi = hi, 2 * hi
    else:
        raise PrecisionError(f"{spec.label}: no truncation found at s = {s}")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if log_tail(mid) < target:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-3 * hi:
            break
    M = int(math.ceil(spec.Q * hi ** spec.kappa)) + 1
    if M > config.AFE_MAX_TERMS:
        raise PrecisionError(f"{spec.label}: AFE needs {M} terms at s = {s}, limit {config.AFE_MAX_TERMS}",
                             math.exp(log_tail(config.AFE_MAX_TERMS / spec.Q)))
    return M


@dataclass(frozen=True)
class AFESums:
    """Both halves of the AFE, divided by exp(log_scale)."""

    direct: complex
    mirror: complex
    abs_error_bound: float
    magnitude: float
    log_scale: float
    terms: int

    @property
    def total(self) -> complex:
        return self.direct + self.mirror


def afe_sums(spec: SelfDualLSpec, s: complex, w: int, delta: Optional[complex] = None,
             terms: Optional[int] = None) -> AFESums:
    """
    Lambda(s) exp(-log_scale) = sum b(n) [(Q/n)^s Gamma(a, y_n delta)
                                + w (Q/n)^(1-s) Gamma(a', y_n/delta)]
    with a = kappa s + lam, a' = kappa (1 - s) + lam, y_n = (n/Q)^(1/kappa)
    and log_scale = Re log Gamma(a).
    """
    s = complex(s)
    if delta is None:
        delta = _delta_for(spec, s)
    if terms is None:
        terms = truncation_bound(spec, s, delta)
    b = np.asarray(spec.coefficients(terms), dtype=np.float64)[1:terms + 1]
    n = np.arange(1, terms + 1, dtype=np.float64)
    keep = b != 0
    b, n = b[keep], n[keep]

    a1 = spec.kappa * s + spec.lam
    a2 = spec.kappa * (1 - s) + spec.lam
    log_scale = loggamma(a1).real
    log_qn = math.log(spec.Q) - np.log(n)
    y = np.exp(-log_qn / spec.kappa)
    g1, e1 = inc_gamma_upper_array(a1, y * delta, log_scale=log_scale)
    g2, e2 = inc_gamma_upper_array(a2, y / delta, log_scale=log_scale)
    w1 = b * np.exp(s * log_qn)
    w2 = w * b * np.exp((1 - s) * log_qn)
    t1, t2 = w1 * g1, w2 * g2
    magnitude = float(np.abs(t1).sum() + np.abs(t2).sum())
    error = (float(np.sum(np.abs(w1) * e1 + np.abs(w2) * e2)) + 8 * _EPS * magnitude
             + config.AFE_TOLERANCE * 1e-2)
    return AFESums(complex(t1.sum()), complex(t2.sum()), error, magnitude, log_scale, terms)


def lambda_scaled(spec: SelfDualLSpec, s: complex, delta: Optional[complex] = None,
                  terms: Optional[int] = None, check: bool = False) -> Tuple[ComplexEval, float]:
    """
    (Lambda(s) exp(-log_scale), log_scale).

    With check=True, or when the rotation is extreme, the sum is recomputed
    with twice the terms until two successive values agree.
    """
    s = complex(s)
    w = spec.require_w()
    if delta is None:
        delta = _delta_for(spec, s)
    sums = afe_sums(spec, s, w, delta, terms)
    uncertain = check or abs(cmath.phase(delta)) > math.pi / 2 - 1e-3
    if uncertain and terms is None:
        for _ in range(4):
            wider = afe_sums(spec, s, w, delta, 2 * sums.terms)
            gap = abs(wider.total - sums.total)
            sums = wider
            if gap <= max(config.AFE_TOLERANCE, 10 * sums.abs_error_bound):
                break
            logger.debug(f"{spec.label}: truncation {sums.terms // 2} unstable at s = {s} (gap {gap:.2e})")
        else:
            raise PrecisionError(f"{spec.label}: truncation did not stabilize at s = {s}", gap)
    return ComplexEval(sums.total, sums.abs_error_bound), sums.log_scale


def lambda_smooth(spec: SelfDualLSpec, s: complex, delta: Optional[complex] = None,
                  terms: Optional[int] = None, check: bool = False) -> ComplexEval:
    """
    Completed Lambda(s).

    The value carries the factor |Gamma(kappa s + lam)|, which underflows
    once kappa |t| passes a few hundred; hardy_Z and l_value stay scaled.
    """
    value, log_scale = lambda_scaled(spec, s, delta, terms, check)
    scale = math.exp(log_scale)
    return ComplexEval(value.value * scale, value.abs_error_bound * scale)


def l_value(spec: SelfDualLSpec, s: complex) -> ComplexEval:
    """L(s) = Lambda(s) / (Q^s Gamma(kappa s + lam))."""
    s = complex(s)
    value, _ = lambda_scaled(spec, s)
    phase = loggamma(spec.kappa * s + spec.lam).imag
    return value / cmath.exp(s * math.log(spec.Q) + 1j * phase)


def _inverse_sqrt_w(w: int) -> complex:
    # w = -1 taken as exp(i pi)
    return 1.0 if w == 1 else cmath.exp(-0.5j * math.pi)


def hardy_Z_with_residue(spec: SelfDualLSpec, t: float) -> Tuple[float, float, float]:
    """(Z(t), discarded imaginary part, summand magnitude), all in units of Z."""
    w = spec.require_w()
    sums = afe_sums(spec, complex(0.5, float(t)), w)
    rotated = _inverse_sqrt_w(w) * sums.total / math.sqrt(spec.Q)
    return rotated.real, rotated.imag, sums.magnitude / math.sqrt(spec.Q)


def hardy_Z(spec: SelfDualLSpec, t: float) -> float:
    """
    Z(t) = w^(-1/2) Lambda(1/2 + it) / (|Gamma(kappa (1/2 + it) + lam)| sqrt(Q)),
    real with |Z(t)| = |L(1/2 + it)|.

    Raises:
        ConsistencyError: the imaginary residue exceeds tolerance
    """
    t = float(t)
    value, residue, magnitude = hardy_Z_with_residue(spec, t)
    allowed = config.HARDY_Z_RESIDUE_TOLERANCE * max(1.0, magnitude)
    if abs(residue) > allowed:
        raise ConsistencyError(f"{spec.label}: Z({t}) has imaginary residue {residue:.3g}")
    return value


def realness_residue(spec: SelfDualLSpec, t: float, w: int,
                     modulus: float = config.AFE_PROBE_MODULUS) -> float:
    """
    |Im(w^(-1/2) Lambda(1/2 + it))| relative to the size of the summands, with
    a smoothing parameter of modulus != 1 so the two halves are independent.
    """
    delta = smoothing_parameter(spec.kappa * t, modulus)
    sums = afe_sums(spec, complex(0.5, t), w, delta)
    rotated = _inverse_sqrt_w(w) * sums.total
    return abs(rotated.imag) / max(sums.magnitude, 1e-300)


def infer_root_number(spec: SelfDualLSpec, probes: Iterable[float] = config.ROOT_NUMBER_PROBES) -> int:
    """
    The sign w for which Z stays real across the probe heights.

    Raises:
        InferenceError: both signs or neither pass
    """
    probes = list(probes)
    passing = []
    for w in (1, -1):
        worst = max(realness_residue(spec, t, w) for t in probes)
        logger.debug(f"{spec.label}: w = {w:+d} worst residue {worst:.3g}")
        if worst < config.HARDY_Z_RESIDUE_TOLERANCE:
            passing.append(w)
    if len(passing) != 1:
        raise InferenceError(f"{spec.label}: root number ambiguous (passing signs {passing})")
    logger.info(f"{spec.label}: inferred root number {passing[0]:+d}")
    return passing[0]


# Zero counting and finding

def gamma_phase(spec: SelfDualLSpec, t: float) -> float:
    """theta_L(t) = t log Q + Im log Gamma(kappa (1/2 + it) + lam)."""
    return t * math.log(spec.Q) + loggamma(spec.kappa * complex(0.5, t) + spec.lam).imag


def zero_density(spec: SelfDualLSpec, t: float) -> float:
    """theta_L'(t)/pi, the mean number of zeros per unit height."""
    deriv = math.log(spec.Q) + spec.kappa * digamma(spec.kappa * complex(0.5, t) + spec.lam).real
    return max(deriv, 0.5) / math.pi


def _arg_on_line(spec: SelfDualLSpec, t: float) -> float:
    return arg_variation(lambda sigma: l_value(spec, complex(sigma, t)).value,
                         config.ARG_START_SIGMA, 0.5)


def zero_count_function(spec: SelfDualLSpec, t0: float, t: float,
                        base: Optional[float] = None) -> float:
    """Continuous count of zeros with t0 < gamma <= t; `base` caches the value of the phase at t0."""
    if base is None:
        base = gamma_phase(spec, t0) + _arg_on_line(spec, t0)
    return (gamma_phase(spec, t) + _arg_on_line(spec, t) - base) / math.pi


def zero_count(spec: SelfDualLSpec, T: float, t0: float = config.ZERO_SCAN_START) -> int:
    """Number of zeros with t0 < gamma <= T by the argument principle."""
    value = zero_count_function(spec, t0, T)
    n = round(value)
    if abs(value - n) > 0.25:
        raise PrecisionError(f"{spec.label}: zero count at T={T} is not near an integer ({value:.4f})",
                             abs(value - n))
    return int(n)


def measurable_start(spec: SelfDualLSpec, t0: float = config.ZERO_SCAN_START,
                     limit: float = 0.5) -> float:
    """
    Smallest of t0, 4 t0, 16 t0, ... where L(1/2 + it) clears its error bound
    by three orders of magnitude, so the argument there is meaningful. Only a
    central zero pushes the start up.
    """
    t = t0
    while t < limit:
        value = l_value(spec, complex(0.5, t))
        if abs(value.value) > 1e3 * value.abs_error_bound:
            return t
        t *= 4
    raise PrecisionError(f"{spec.label}: L(1/2 + it) indistinguishable from zero for t < {limit}")


def _gap(spec: SelfDualLSpec, t: float) -> float:
    return 1.0 / zero_density(spec, t)


def _scan(spec: SelfDualLSpec, start: float, end: float, expected: int) -> WindowResult:
    return scan_window(partial(hardy_Z, spec), start, end, expected, partial(_gap, spec),
                       config.L_ZERO_TOLERANCE)


def find_zeros(spec: SelfDualLSpec, T: float, parallelism: int = 1,
               t0: float = config.ZERO_SCAN_START) -> LZeroList:
    """
    Zeros of L(1/2 + it) for t0 < t <= T, certified window by window against
    the argument-principle count.

    Raises:
        IncompletenessError: a window stayed unresolved; the partial list rides along
    """
    spec.require_w()
    t0 = measurable_start(spec, t0)
    if not T > t0:
        raise ValidationError(f"height {T} must exceed the scan start {t0}")
    base = gamma_phase(spec, t0) + _arg_on_line(spec, t0)

    def count(x: float) -> float:
        return zero_count_function(spec, t0, x, base)

    T, total = nudged_count(count, T, _gap(spec, T))
    windows = []
    previous = 0
    for a, b in split_windows(t0, T, partial(zero_density, spec)):
        n_b = total if b >= T else None
        if n_b is None:
            b, n_b = nudged_count(count, b, _gap(spec, b))
        start = windows[-1][1] if windows else a
        windows.append((start, b, n_b - previous))
        previous = n_b

    if parallelism > 1 and len(windows) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            futures = [pool.submit(_scan, spec, a, b, n) for a, b, n in windows]
            results = [f.result() for f in futures]
    else:
        results = [_scan(spec, a, b, n) for a, b, n in windows]

    ordinates = np.array(sorted(z for r in results for z in r.zeros), dtype=np.float64)
    complete = all(r.matched for r in results) and ordinates.size == total
    zl = LZeroList(ordinates, float(T), complete, "computed", spec.label,
                   {"windows": len(windows), "scan_start": t0, "root_number": spec.w},
                   spec=spec)
    if not complete:
        bad = [(round(r.start, 4), round(r.end, 4)) for r in results if not r.matched]
        raise IncompletenessError(f"{spec.label}: zero count unresolved in windows {bad}", partial=zl)
    logger.info(f"{spec.label}: certified {len(zl)} zeros up to T={T:.4f}")
    return zl


def _family_member(d: int, T: float) -> Tuple[int, LZeroList]:
    return d, find_zeros(quadratic_spec(d), T)


def find_family_zeros(discriminants: Iterable[int], T: float,
                      parallelism: int = 1) -> Dict[int, LZeroList]:
    """Zeros of L(s, chi_d) up to T for every d, in the order given."""
    discriminants = list(discriminants)
    if parallelism > 1 and len(discriminants) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            futures = [pool.submit(_family_member, d, T) for d in discriminants]
            pairs = [f.result() for f in futures]
    else:
        pairs = [_family_member(d, T) for d in discriminants]
    logger.info(f"Found zeros for {len(pairs)} discriminants up to T={T}")
    return dict(pairs)


def vanishing_order(spec: SelfDualLSpec, max_order: int = 8, radius: Optional[float] = None,
                    rel_tol: float = 1e-4, points: int = 32) -> int:
    """
    Order of vanishing of L at s = 1/2.

    Taylor coefficients of Lambda(1/2 + z) come from the trapezoidal rule on
    |z| = radius (a discrete Fourier transform). The default radius shrinks
    with log Q so the circle stays inside the gap to the first zeros. Lambda
    is even in z for w = +1 and odd for w = -1, so only matching orders count.

    Returns:
        The first order whose term on the circle exceeds rel_tol of the
        largest term and ten times the evaluation error
    """
    w = spec.require_w()
    parity = 0 if w == 1 else 1
    if radius is None:
        radius = min(config.VANISHING_MAX_RADIUS, 1.0 / math.log(spec.Q + math.e))
    if points < 2 * (max_order + 2):
        raise DomainError(f"{points} circle points cannot resolve order {max_order}")
    theta = 2 * math.pi * (np.arange(points) + 0.5) / points
    values = np.empty(points, dtype=complex)
    noise = 0.0
    half = points // 2
    # real coefficients: Lambda(conj s) = conj Lambda(s)
    for j in range(half):
        ev = lambda_smooth(spec, 0.5 + radius * cmath.exp(1j * theta[j]))
        values[j] = ev.value
        values[points - 1 - j] = ev.value.conjugate()
        noise = max(noise, ev.abs_error_bound)
    terms = np.abs(np.fft.fft(values)) / points
    orders = np.arange(parity, points // 2, 2)
    largest = float(terms[orders].max())
    if largest <= 10 * noise:
        raise PrecisionError(f"{spec.label}: Lambda indistinguishable from zero on |z| = {radius:g}", noise)
    floor = max(rel_tol * largest, 10 * noise)
    for k in orders[orders <= max_order].tolist():
        if terms[k] > floor:
            logger.info(f"{spec.label}: order of vanishing {k}")
            return int(k)
    raise PrecisionError(f"{spec.label}: no term up to order {max_order} above {floor:.3g}", floor)


def lowest_zero_summary(family: Dict[int, ZeroList]) -> Dict[str, Dict[str, float]]:
    """Mean lowest ordinate over d < 0 and over d > 0."""
    summary = {}
    for name, sign in (("negative", -1), ("positive", 1)):
        lowest = [zl.ordinates[0] for d, zl in family.items()
                  if d * sign > 0 and len(zl) > 0]
        summary[name] = {
            "count": len(lowest),
            "mean_lowest": float(np.mean(lowest)) if lowest else float('nan'),
        }
    return summary
