"""Local Euler-factor corrections to 1/zeta(s + 1/2)^r at small primes."""
import logging
import math
from typing import List, Optional

import numpy as np

from arith.primes import sieve_primes
from core.errors import DependencyError
from core.special import ComplexEval
from core.zeta import zeta
from curves.ap_table import APTable
from curves.point_count import ap
from curves.weierstrass import WeierstrassCurve

logger = logging.getLogger(__name__)


def local_prime_set(r: int) -> List[int]:
    """Primes with 2 sqrt(p) < r, i.e. p < r^2/4."""
    if r <= 2:
        return []
    bound = math.ceil(r * r / 4) - 1
    return [p for p in sieve_primes(max(bound, 2)).primes.tolist() if 4 * p < r * r]


def local_factor(a_p: int, p: int, bad: bool, s: complex) -> complex:
    """The Euler factor of L(E, s) at p in the centred normalization."""
    x = p ** (-s - 0.5)
    if bad:
        return 1 / (1 - a_p * x)
    return 1 / (1 - a_p * x + p ** (-2 * s))


def local_correction(curve: WeierstrassCurve, r: int, s: complex,
                     table: Optional[APTable] = None) -> ComplexEval:
    """
    prod over p with 2 sqrt(p) < r of L_p(s) (1 - p^(-s-1/2))^-r: the true
    local factor in place of the one of 1/zeta(s + 1/2)^r.

    Args:
        curve: Curve supplying a(p)
        r: Rank
        s: Point of evaluation
        table: a(p) table to read from; None counts points directly
    """
    s = complex(s)
    value = 1 + 0j
    for p in local_prime_set(r):
        if table is not None:
            if p > table.bound:
                raise DependencyError(f"a({p}) missing for the local correction of {curve.name}")
            a_p, bad = table[p], table.is_bad(p)
        else:
            a_p, bad = ap(curve, p), curve.is_bad(p)
        value *= local_factor(a_p, p, bad, s) * (1 - p ** (-s - 0.5)) ** (-r)
    return ComplexEval(value, 16 * np.finfo(float).eps * abs(value))


def rank_ratio_prediction(curve: WeierstrassCurve, r: int, t: float, corrected: bool = True,
                          table: Optional[APTable] = None) -> float:
    """
    |local_correction(1/2 + it)| / |zeta(1 + it)|^r, or 1/|zeta(1 + it)|^r
    when corrected is False.
    """
    if r == 0:
        return abs(local_correction(curve, r, complex(0.5, t), table).value) if corrected else 1.0
    if t == 0:
        return 0.0
    z = abs(zeta(complex(1, t)).value)
    if z < 1e-300:
        return math.inf
    local = abs(local_correction(curve, r, complex(0.5, t), table).value) if corrected else 1.0
    return local / z ** r
