"""
Arithmetic factors A_D, A'_D, A and B as accelerated Euler products.

Each product or prime sum is split into zeta values carrying its slowly
converging leading terms and a residual whose prime terms are O(log^k p / p^3).
The residual is truncated at a prime cutoff that doubles until the tail
bound falls below the target.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np

import config
from arith.primes import sieve_primes
from core.errors import DomainError
from core.zeta import zeta, zeta_logderiv, zeta_logderiv_prime

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EulerProductValue:
    """Truncated product or sum with a bound on the discarded primes."""

    value: complex
    prime_cutoff: int
    tail_bound: float

    def __complex__(self) -> complex:
        return complex(self.value)


@lru_cache(maxsize=4)
def _primes(P: int) -> np.ndarray:
    primes = sieve_primes(P).primes.astype(np.float64)
    primes.setflags(write=False)
    return primes


def _tail_integral(P: float, log_power: int, decay: float) -> float:
    """Upper estimate of sum_{p > P} log(p)^log_power / p^decay from the prime density 1/log x."""
    lp = math.log(P)
    return 1.25 * lp ** (log_power - 1) / ((decay - 1) * P ** (decay - 1)) * (1 + 1 / lp)


def _fsum_complex(terms: np.ndarray) -> complex:
    return complex(math.fsum(terms.real.tolist()), math.fsum(terms.imag.tolist()))


def _residual_sum(kernel: Callable[[np.ndarray], np.ndarray], log_power: int, decay: float = 3.0,
                  cutoff: Optional[int] = None) -> Tuple[complex, int, float]:
    """
    sum_p kernel(p) with a tail bound, doubling the cutoff until the bound is
    below target. A fixed cutoff skips the doubling.

    The constant in the tail bound is twice the largest |kernel(p)| p^decay / log(p)^log_power
    seen among the last primes kept.
    """
    P = cutoff or config.EULER_PRIME_CUTOFF
    while True:
        p = _primes(P)
        terms = kernel(p)
        total = _fsum_complex(terms)
        last = p[-256:]
        constant = 2 * float(np.max(np.abs(terms[-256:]) * last ** decay / np.log(last) ** log_power))
        tail = constant * _tail_integral(P, log_power, decay)
        if cutoff or tail <= config.EULER_TAIL_TARGET or P >= config.EULER_MAX_CUTOFF:
            break
        P *= 2
    if not cutoff and tail > config.EULER_TAIL_TARGET:
        logger.warning(f"Euler tail bound {tail:.2e} above target at cutoff {P}")
    return total, P, tail


def _require_strip(x: complex, half_width: float, name: str) -> None:
    if not abs(complex(x).real) < half_width:
        raise DomainError(f"{name}: |Re| must be below {half_width}, got {complex(x).real}")


def A_D(r: complex, cutoff: Optional[int] = None) -> EulerProductValue:
    """
    A_D(-r; r) = prod_p (1 - 1/((p+1) p^(1-2r)) - 1/(p+1)) (1 - 1/p)^-1.

    Each factor simplifies to (1 - p^(2r-2))/(1 - p^-2), so the product is
    zeta(2)/zeta(2 - 2r) exactly. Passing a cutoff evaluates the truncated
    product instead.
    """
    r = complex(r)
    if not r.real < 0.5:
        raise DomainError(f"A_D diverges for Re r >= 1/2 (r = {r})")
    if cutoff:
        def log_factor(p):
            return np.log1p(-p ** (2 * r - 2)) - np.log1p(-p ** -2.0)
        total, P, tail = _residual_sum(log_factor, 0, decay=2.0 - 2 * max(r.real, 0.0), cutoff=cutoff)
        value = np.exp(total)
        return EulerProductValue(complex(value), P, abs(value) * math.expm1(tail))
    ratio = zeta(2) / zeta(2 - 2 * r)
    return EulerProductValue(ratio.value, 0, ratio.abs_error_bound)


def A_D_prime(r: complex, cutoff: Optional[int] = None) -> EulerProductValue:
    """
    A'_D(r; r) = sum_p log(p) / ((p+1)(p^(1+2r) - 1))
              = -zeta'/zeta(2+2r) + sum_p log(p) [1/((p+1)(p^(1+2r)-1)) - 1/(p^(2+2r)-1)].
    """
    r = complex(r)
    _require_strip(r, 0.25, "A'_D")

    def residual(p):
        x = p ** (1 + 2 * r)
        return np.log(p) * (p - x) / ((p + 1) * (x - 1) * (p * x - 1))

    total, P, tail = _residual_sum(residual, 1, cutoff=cutoff)
    lead = -zeta_logderiv(2 + 2 * r)
    return EulerProductValue(lead.value + total, P, tail + lead.abs_error_bound)


def A_pc(eta: complex, cutoff: Optional[int] = None) -> EulerProductValue:
    """
    A(eta) = prod_p (1 - p^(-1-eta))(1 - 2/p + p^(-1-eta))(1 - 1/p)^-2
           = zeta(2+eta)^2 / (zeta(2+2eta) zeta(2)) * prod_p G_p(eta),

    where each factor equals 1 - (u - v)^2/(1 - v)^2 with u = p^(-1-eta),
    v = 1/p, and G_p divides out its p^-2 terms.
    """
    eta = complex(eta)
    _require_strip(eta, 0.5, "A")

    def log_residual(p):
        u = p ** (-1 - eta)
        v = 1.0 / p
        factor = 1 - (u - v) ** 2 / (1 - v) ** 2
        return (np.log(factor) + 2 * np.log1p(-p ** (-2 - eta))
                - np.log1p(-p ** (-2 - 2 * eta)) - np.log1p(-p ** -2.0))

    total, P, tail = _residual_sum(log_residual, 0, cutoff=cutoff)
    lead = zeta(2 + eta) * zeta(2 + eta) / (zeta(2 + 2 * eta) * zeta(2))
    value = lead.value * np.exp(total)
    return EulerProductValue(complex(value), P, abs(value) * math.expm1(tail) + lead.abs_error_bound)


def B_pc(eta: complex, cutoff: Optional[int] = None) -> EulerProductValue:
    """
    B(eta) = sum_p (log(p) / (p^(1+eta) - 1))^2
           = (zeta'/zeta)'(2+2eta) + sum_p log(p)^2 (2x + 1)/(x^2 - 1)^2, x = p^(1+eta).
    """
    eta = complex(eta)
    _require_strip(eta, 0.5, "B")

    def residual(p):
        x = p ** (1 + eta)
        return np.log(p) ** 2 * (2 * x + 1) / (x * x - 1) ** 2

    total, P, tail = _residual_sum(residual, 2, cutoff=cutoff)
    lead = zeta_logderiv_prime(2 + 2 * eta)
    return EulerProductValue(lead.value + total, P, tail + lead.abs_error_bound)
