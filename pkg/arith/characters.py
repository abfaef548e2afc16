"""Kronecker symbol, quadratic characters and fundamental discriminants."""
import logging
import math
from typing import List

import numpy as np

from arith.primes import iter_prime_segments, simple_sieve, smallest_prime_factors
from core.errors import ValidationError

logger = logging.getLogger(__name__)

# (a/2) for a mod 8
_TWO_TABLE = (0, 1, 0, -1, 0, -1, 0, 1)

SIGN_FILTERS = ('both', 'positive', 'negative')


def kronecker(d: int, n: int) -> int:
    """
    Kronecker symbol (d/n) for n >= 0.

    Binary algorithm: strip twos with the (d/2) table, then alternate
    reciprocity and reduction on odd arguments.
    """
    if n < 0:
        raise ValidationError(f"kronecker expects n >= 0, got {n}")
    if n == 0:
        return 1 if abs(d) == 1 else 0
    if d % 2 == 0 and n % 2 == 0:
        return 0
    v = 0
    while n % 2 == 0:
        v += 1
        n //= 2
    k = 1 if v % 2 == 0 else _TWO_TABLE[d & 7]
    a, b = d, n
    while True:
        if a == 0:
            return k if b == 1 else 0
        v = 0
        while a % 2 == 0:
            v += 1
            a //= 2
        if v % 2 == 1:
            k *= _TWO_TABLE[b & 7]
        if a & b & 2:
            k = -k
        r = abs(a)
        a, b = b % r, r


def is_squarefree(n: int) -> bool:
    n = abs(n)
    if n == 0:
        return False
    if n % 4 == 0:
        return False
    return all(n % (p * p) for p in simple_sieve(math.isqrt(n)).tolist())


def is_fundamental_discriminant(d: int) -> bool:
    """True iff d is 1 mod 4 and squarefree, or 4m with m = 2, 3 mod 4 squarefree."""
    if d == 0:
        raise ValidationError("0 is not a discriminant")
    if d % 4 == 1:
        return is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


def squarefree_mask(lo: int, hi: int) -> np.ndarray:
    """mask[i] is True iff lo + i is squarefree, for lo + i in [lo, hi) with lo >= 1."""
    if hi <= lo:
        return np.zeros(0, dtype=bool)
    mask = np.ones(hi - lo, dtype=bool)
    for p in simple_sieve(math.isqrt(hi - 1)).tolist():
        q = p * p
        start = ((lo + q - 1) // q) * q
        mask[start - lo::q] = False
    return mask


def _fundamental_of_sign(a: int, b: int, sign: int) -> np.ndarray:
    """Fundamental d = sign*n with n in [a, b), a >= 1, ascending in n."""
    if b <= a:
        return np.zeros(0, dtype=np.int64)
    n = np.arange(a, b, dtype=np.int64)
    d = sign * n
    sqf_n = squarefree_mask(a, b)
    m_lo = max(1, a // 4)
    m_hi = b // 4 + 2
    sqf_m = squarefree_mask(m_lo, m_hi)
    m = d // 4
    m_abs = np.abs(m)
    m_ok = np.zeros(n.size, dtype=bool)
    in_range = (m_abs >= m_lo) & (m_abs < m_hi)
    m_ok[in_range] = sqf_m[m_abs[in_range] - m_lo]
    odd_case = (d % 4 == 1) & sqf_n
    even_case = (d % 4 == 0) & np.isin(m % 4, (2, 3)) & m_ok
    return d[odd_case | even_case]


def enumerate_fundamental_discriminants(lo: int, hi: int, sign: str = 'both',
                                        include_one: bool = False) -> List[int]:
    """
    Ascending fundamental discriminants d with lo < d < hi.

    Args:
        lo: Exclusive lower end
        hi: Exclusive upper end
        sign: 'both', 'positive' or 'negative'
        include_one: Keep the trivial discriminant d = 1

    Returns:
        Ascending list of discriminants
    """
    if sign not in SIGN_FILTERS:
        raise ValidationError(f"sign filter must be one of {SIGN_FILTERS}, got {sign!r}")
    parts = []
    if sign in ('both', 'negative') and lo < -1:
        neg = _fundamental_of_sign(max(1, -min(hi, 0) + 1), -lo, -1)
        parts.append(neg[::-1])
    if sign in ('both', 'positive') and hi > 1:
        parts.append(_fundamental_of_sign(max(1, lo + 1), hi, 1))
    if not parts:
        return []
    ds = np.concatenate(parts)
    if not include_one:
        ds = ds[ds != 1]
    logger.debug(f"Enumerated {ds.size} fundamental discriminants in ({lo}, {hi})")
    return ds.tolist()


def prime_discriminants(lo: int, hi: int) -> List[int]:
    """The fundamental discriminant +-p attached to each odd prime p in [lo, hi), ordered by p."""
    out = []
    for seg in iter_prime_segments(max(lo, 3), hi):
        out.extend(np.where(seg % 4 == 1, seg, -seg).tolist())
    return out


def character_values(d: int, bound: int) -> np.ndarray:
    """
    chi_d(n) for n = 0..bound as int8 (index 0 is 0).

    chi_d is completely multiplicative, so values come from the primes by
    peeling smallest prime factors off every index at once.
    """
    values = np.zeros(bound + 1, dtype=np.int8)
    if bound < 1:
        return values
    spf = smallest_prime_factors(bound)
    at_prime = np.zeros(bound + 1, dtype=np.int8)
    for p in simple_sieve(bound).tolist():
        at_prime[p] = kronecker(d, p)
    rest = np.arange(bound + 1, dtype=np.int64)
    acc = np.ones(bound + 1, dtype=np.int8)
    active = rest > 1
    while active.any():
        p = spf[rest[active]]
        acc[active] *= at_prime[p]
        rest[active] //= p
        active = rest > 1
    values[1:] = acc[1:]
    return values
