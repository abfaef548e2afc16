"""Dirichlet coefficients a(n)/sqrt(n) and explicit-formula coefficients c(n)."""
import logging
import math
from typing import Dict

import numpy as np

from arith.primes import iter_prime_segments, smallest_prime_factors
from core.errors import DependencyError
from curves.ap_table import APTable

logger = logging.getLogger(__name__)


def _require_primes(table: APTable, bound: int) -> None:
    if table.bound >= bound:
        return
    for seg in iter_prime_segments(table.bound + 1, bound + 1):
        p = int(seg[0])
        raise DependencyError(f"a({p}) missing: table for {table.curve_id} stops at {table.bound}")


def prime_power_coeffs(a_p: int, p: int, bad: bool, k_max: int) -> list:
    """[a(1), a(p), a(p^2), ..., a(p^k_max)] from the local Euler factor."""
    out = [1, a_p]
    for _ in range(2, k_max + 1):
        if bad:
            out.append(out[-1] * a_p)
        else:
            out.append(a_p * out[-1] - p * out[-2])
    return out[:k_max + 1]


def prime_power_depth(p: int, M: int) -> int:
    """Largest k with p^k <= M."""
    k, q = 0, p
    while q <= M:
        k += 1
        q *= p
    return k


def hecke_coeffs(table: APTable, M: int) -> np.ndarray:
    """
    a(n) for 0 <= n <= M (a(0) = 0) by multiplicativity.

    Every index sheds its smallest prime power per pass, so the loop runs
    at most log2(M) times over the whole array.
    """
    _require_primes(table, M)
    a = np.zeros(M + 1, dtype=np.int64)
    if M < 1:
        return a
    a[1] = 1
    if M < 2:
        return a
    ap_arr = np.zeros(M + 1, dtype=np.int64)
    bad_arr = np.zeros(M + 1, dtype=bool)
    k = int(np.searchsorted(table.primes, M, side='right'))
    ap_arr[table.primes[:k]] = table.values[:k]
    bad_arr[table.primes[:k]] = table.bad[:k]

    root = math.isqrt(M)
    k_max = max(1, int(math.log2(M)) + 1)
    pk = np.zeros((k_max + 1, root + 1), dtype=np.int64)
    for p in table.primes[:int(np.searchsorted(table.primes, root, side='right'))].tolist():
        # only exponents with p^k <= M occur; deeper a(p^k) overflow int64
        depth = prime_power_depth(p, M)
        pk[:depth + 1, p] = prime_power_coeffs(int(ap_arr[p]), p, bool(bad_arr[p]), depth)

    spf = smallest_prime_factors(M)
    rest = np.arange(M + 1, dtype=np.int64)
    acc = np.ones(M + 1, dtype=np.int64)
    idx = np.flatnonzero(rest > 1)
    while idx.size:
        r = rest[idx]
        p = spf[r]
        q = r // p
        e = np.ones(idx.size, dtype=np.int64)
        div = q % p == 0
        while div.any():
            q[div] //= p[div]
            e[div] += 1
            div = q % p == 0
        val = np.where(e == 1, ap_arr[p], pk[np.minimum(e, k_max), np.minimum(p, root)])
        acc[idx] *= val
        rest[idx] = q
        idx = idx[q > 1]
    a[2:] = acc[2:]
    return a


def dirichlet_coeffs(table: APTable, M: int) -> np.ndarray:
    """b(n) = a(n)/sqrt(n) for 0 <= n <= M as float64 (b(0) = 0)."""
    a = hecke_coeffs(table, M)
    n = np.arange(M + 1, dtype=np.float64)
    n[0] = 1.0
    b = a / np.sqrt(n)
    b[0] = 0.0
    return b


def frobenius_power_sums(a_p: int, p: int, bad: bool, k_max: int) -> list:
    """alpha^k + beta^k for k = 0..k_max, with alpha + beta = a(p)/sqrt(p)."""
    u1 = a_p / math.sqrt(p)
    if bad:
        return [1.0] + [u1 ** k for k in range(1, k_max + 1)]
    out = [2.0, u1]
    for _ in range(2, k_max + 1):
        out.append(u1 * out[-1] - out[-2])
    return out[:k_max + 1]


def cn_coeffs(table: APTable, X: int) -> Dict[int, float]:
    """Sparse c(n) = log(p)(alpha^k + beta^k) on prime powers n = p^k <= X."""
    _require_primes(table, X)
    c: Dict[int, float] = {}
    k = int(np.searchsorted(table.primes, X, side='right'))
    for p, a_p, bad in zip(table.primes[:k].tolist(), table.values[:k].tolist(), table.bad[:k].tolist()):
        powers = [p]
        while powers[-1] * p <= X:
            powers.append(powers[-1] * p)
        sums = frobenius_power_sums(a_p, p, bad, len(powers))
        logp = math.log(p)
        for j, q in enumerate(powers, start=1):
            c[q] = logp * sums[j]
    return c


def symmetric_square_coeff(table: APTable, p: int) -> float:
    """Prime coefficient of the symmetric square: (a(p)^2 - p)/p, or a(p)^2/p at bad p."""
    a_p = table[p]
    if table.is_bad(p):
        return a_p * a_p / p
    return (a_p * a_p - p) / p
