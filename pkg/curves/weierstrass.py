"""Weierstrass models over Q and their standard invariants."""
import functools
import hashlib
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from core.errors import ReductionError, SingularCurveError, ValidationError

logger = logging.getLogger(__name__)

_LIMB_BITS = 20


@dataclass(frozen=True)
class CurveInvariants:
    b2: int
    b4: int
    b6: int
    b8: int
    c4: int
    c6: int
    discriminant: int


@dataclass(frozen=True)
class WeierstrassCurve:
    """
    Minimal model y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6.

    The conductor is a trusted input. When it is missing, a prime is treated
    as bad exactly when it divides the discriminant.
    """

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    conductor: Optional[int] = None
    rank: Optional[int] = None
    root_number: Optional[int] = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.conductor is not None and self.conductor < 1:
            raise ValidationError(f"conductor must be positive, got {self.conductor}")
        if self.rank is not None and self.rank < 0:
            raise ValidationError(f"rank must be nonnegative, got {self.rank}")
        if self.root_number not in (None, 1, -1):
            raise ValidationError(f"root number must be +1 or -1, got {self.root_number}")
        delta = invariants(self).discriminant
        if self.conductor is not None and not radical_divides(self.conductor, delta):
            raise ValidationError(
                f"conductor {self.conductor} has a prime factor not dividing the discriminant")

    @property
    def coefficients(self) -> Tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def curve_hash(self) -> str:
        text = ",".join(str(a) for a in self.coefficients)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    @property
    def name(self) -> str:
        return self.label or "[" + ",".join(str(a) for a in self.coefficients) + "]"

    def short_model(self, p: int) -> Tuple[int, int]:
        """(A, B) with E ~ y^2 = x^3 + A x + B over F_p, valid for p > 3."""
        inv = invariants(self)
        return (-27 * inv.c4) % p, (-54 * inv.c6) % p

    def is_bad(self, p: int) -> bool:
        """True iff p divides the conductor (or the discriminant when no conductor is known)."""
        delta = invariants(self).discriminant
        if self.conductor is None:
            return delta % p == 0
        if self.conductor % p == 0:
            return True
        if delta % p == 0:
            raise ReductionError(f"model of {self.name} is not minimal at {p}: p | disc but p does not divide N")
        return False

    def bad_mask(self, primes: np.ndarray) -> np.ndarray:
        """Vectorized is_bad over an array of primes."""
        delta = invariants(self).discriminant
        in_delta = divides_mask(delta, primes)
        if self.conductor is None:
            return in_delta
        in_n = divides_mask(self.conductor, primes)
        stray = in_delta & ~in_n
        if stray.any():
            p = int(primes[np.flatnonzero(stray)[0]])
            raise ReductionError(f"model of {self.name} is not minimal at {p}: p | disc but p does not divide N")
        return in_n

    def with_metadata(self, **changes) -> "WeierstrassCurve":
        values = dict(conductor=self.conductor, rank=self.rank,
                      root_number=self.root_number, label=self.label)
        values.update(changes)
        return WeierstrassCurve(*self.coefficients, **values)


def invariants(curve: WeierstrassCurve) -> CurveInvariants:
    """Standard b/c/discriminant formulas in exact integer arithmetic."""
    return _invariants(curve.coefficients)


@functools.lru_cache(maxsize=256)
def _invariants(coefficients: Tuple[int, int, int, int, int]) -> CurveInvariants:
    a1, a2, a3, a4, a6 = coefficients
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    c4 = b2 * b2 - 24 * b4
    c6 = -b2 ** 3 + 36 * b2 * b4 - 216 * b6
    delta = -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    if delta == 0:
        raise SingularCurveError(f"curve {list(coefficients)} is singular (discriminant 0)")
    assert 1728 * delta == c4 ** 3 - c6 ** 2
    return CurveInvariants(b2, b4, b6, b8, c4, c6, delta)


def radical_divides(n: int, m: int) -> bool:
    """True iff every prime factor of n divides m, without factoring."""
    n = abs(n)
    while n > 1:
        g = math.gcd(n, m)
        if g == 1:
            return False
        n //= g
    return True


def divides_mask(n: int, primes: np.ndarray) -> np.ndarray:
    """mask[i] is True iff primes[i] divides the (arbitrarily large) integer n."""
    n = abs(n)
    if n == 0:
        return np.ones(primes.shape, dtype=bool)
    limbs = []
    while n:
        limbs.append(n & ((1 << _LIMB_BITS) - 1))
        n >>= _LIMB_BITS
    p = primes.astype(np.int64)
    acc = np.zeros(p.shape, dtype=np.int64)
    for limb in reversed(limbs):
        acc = ((acc << _LIMB_BITS) + limb) % p
    return acc == 0
