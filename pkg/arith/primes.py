"""Plain and segmented prime sieves backed by numpy."""
import logging
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

import config
from core.errors import ResourceError, ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PrimeTable:
    """Complete ascending list of the primes in [start, limit]."""

    limit: int
    primes: np.ndarray
    start: int = 2

    def __post_init__(self):
        self.primes.setflags(write=False)

    def __len__(self) -> int:
        return int(self.primes.size)

    def __iter__(self):
        return iter(self.primes.tolist())

    def __contains__(self, n: int) -> bool:
        i = int(np.searchsorted(self.primes, n))
        return i < self.primes.size and int(self.primes[i]) == n

    def up_to(self, x: float) -> np.ndarray:
        """Primes p <= x as a read-only view."""
        return self.primes[: int(np.searchsorted(self.primes, x, side='right'))]


def simple_sieve(limit: int) -> np.ndarray:
    """Eratosthenes over [0, limit]; returns the primes as int64."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p:limit + 1:p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def _odd_segment(low: int, high: int, base: np.ndarray) -> np.ndarray:
    """Odd primes in [low, high) with low odd, using base primes up to sqrt(high)."""
    odd_count = (high - low + 1) // 2
    if odd_count <= 0:
        return np.array([], dtype=np.int64)
    mask = np.ones(odd_count, dtype=bool)
    for p in base[1:].tolist():
        p2 = p * p
        if p2 >= high:
            break
        start = max(p2, ((low + p - 1) // p) * p)
        if (start & 1) == 0:
            start += p
        if start >= high:
            continue
        mask[(start - low) // 2::p] = False
    return low + 2 * np.flatnonzero(mask).astype(np.int64)


def iter_prime_segments(lo: int, hi: int, window: int = config.SIEVE_WINDOW) -> Iterator[np.ndarray]:
    """
    Stream the primes in [lo, hi) one window at a time.

    Args:
        lo: Inclusive lower end (any nonnegative integer, offsets up to 10^12 are fine)
        hi: Exclusive upper end
        window: Number of integers covered per segment

    Yields:
        Ascending int64 arrays of primes, one per non-empty segment
    """
    if hi <= lo or hi <= 2:
        return
    base = simple_sieve(math.isqrt(hi) + 1)
    if lo <= 2 < hi:
        yield np.array([2], dtype=np.int64)
    low = max(lo, 3)
    if low % 2 == 0:
        low += 1
    span = max(2, window - window % 2)
    while low < hi:
        high = min(low + span, hi)
        seg = _odd_segment(low, high, base)
        if seg.size:
            yield seg
        low = high if high % 2 == 1 else high + 1


def sieve_primes(limit: int, segmented: Optional[bool] = None,
                 max_bytes: int = config.SIEVE_MAX_BYTES) -> PrimeTable:
    """
    Build the complete table of primes up to limit.

    The plain sieve needs one byte per integer; the segmented path only keeps
    one window plus the output, so it is chosen automatically above one window.
    """
    if limit < 2:
        raise ValidationError(f"sieve limit must be >= 2, got {limit}")
    if segmented is None:
        segmented = limit > config.SIEVE_WINDOW
    if not segmented:
        if limit + 1 > max_bytes:
            raise ResourceError(f"plain sieve to {limit} needs {limit + 1} bytes, budget is {max_bytes}")
        primes = simple_sieve(limit)
    else:
        estimate = int(1.26 * limit / math.log(limit)) * 8
        if estimate > max_bytes:
            raise ResourceError(f"prime table to {limit} needs ~{estimate} bytes, budget is {max_bytes}")
        parts = list(iter_prime_segments(2, limit + 1))
        primes = np.concatenate(parts) if parts else np.array([], dtype=np.int64)
    logger.debug(f"Sieved {primes.size} primes up to {limit}")
    return PrimeTable(limit=limit, primes=primes)


def sieve_window(lo: int, hi: int, window: int = config.SIEVE_WINDOW) -> PrimeTable:
    """Primes in the half-open window [lo, hi)."""
    if hi < lo:
        raise ValidationError(f"empty window [{lo}, {hi})")
    parts = list(iter_prime_segments(lo, hi, window))
    primes = np.concatenate(parts) if parts else np.array([], dtype=np.int64)
    logger.info(f"Window [{lo}, {hi}) holds {primes.size} primes")
    return PrimeTable(limit=hi - 1, primes=primes, start=lo)


def smallest_prime_factors(n: int) -> np.ndarray:
    """spf[k] = smallest prime dividing k for 2 <= k <= n (spf[0] = spf[1] = 0)."""
    spf = np.zeros(n + 1, dtype=np.int64)
    if n < 2:
        return spf
    for p in range(2, math.isqrt(n) + 1):
        if spf[p] == 0:
            block = spf[p * p::p]
            block[block == 0] = p
    rest = np.flatnonzero(spf == 0)
    spf[rest] = rest
    spf[:2] = 0
    return spf
