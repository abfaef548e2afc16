"""Trace of Frobenius a(p): character sums, BSGS and direct enumeration."""
import logging
import math
import random
from typing import Optional, Set, Tuple

import numpy as np

import config
from core.errors import ReductionError
from curves.weierstrass import WeierstrassCurve, invariants

logger = logging.getLogger(__name__)

Point = Optional[Tuple[int, int]]  # None is the point at infinity


def legendre(a: int, p: int) -> int:
    """Legendre symbol by Euler's criterion (p an odd prime)."""
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def modsqrt(a: int, p: int) -> int:
    """Square root mod an odd prime p by Tonelli-Shanks; a must be a square."""
    a %= p
    if a == 0:
        return 0
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    t, s = p - 1, 0
    while t % 2 == 0:
        t //= 2
        s += 1
    v = 2
    while legendre(v, p) != -1:
        v += 1
    g = pow(v, t, p)
    x = pow(a, (t + 1) // 2, p)
    b = pow(a, t, p)
    r = s
    while b != 1:
        m, bpow = 0, b
        while bpow != 1:
            bpow = bpow * bpow % p
            m += 1
        w = pow(g, 1 << (r - m - 1), p)
        g = w * w % p
        x = x * w % p
        b = b * g % p
        r = m
    return x


# Group law on y^2 = x^3 + A x + B over F_p

def ec_add(P: Point, Q: Point, A: int, p: int) -> Point:
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 + A) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return x3, (lam * (x1 - x3) - y1) % p


def ec_neg(P: Point, p: int) -> Point:
    return None if P is None else (P[0], (-P[1]) % p)


def ec_mul(k: int, P: Point, A: int, p: int) -> Point:
    if k < 0:
        return ec_mul(-k, ec_neg(P, p), A, p)
    result, addend = None, P
    while k:
        if k & 1:
            result = ec_add(result, addend, A, p)
        addend = ec_add(addend, addend, A, p)
        k >>= 1
    return result


def random_point(A: int, B: int, p: int, rng: random.Random) -> Point:
    while True:
        x = rng.randrange(p)
        f = (x * x * x + A * x + B) % p
        if f == 0:
            return x, 0
        if legendre(f, p) == 1:
            return x, modsqrt(f, p)


# Counting strategies

def ap_charsum(A: int, B: int, p: int) -> int:
    """a(p) = -sum_x (f(x)/p) for f = x^3 + A x + B, vectorized over x in F_p."""
    xs = np.arange(p, dtype=np.int64)
    squares = np.zeros(p, dtype=bool)
    squares[xs * xs % p] = True
    f = ((xs * xs % p) * xs + (A % p) * xs + (B % p)) % p
    symbol = np.where(squares[f], 1, -1)
    symbol[f == 0] = 0
    return -int(symbol.sum())


def _hasse_candidates(P: Point, A: int, p: int) -> Set[int]:
    """All m in the Hasse interval with mP = O, by baby-step/giant-step on x-coordinates."""
    bound = math.isqrt(4 * p)
    lo, hi = p + 1 - bound, p + 1 + bound
    m_b = math.isqrt(hi - lo) + 1
    baby = {}
    R = None
    for j in range(m_b + 1):
        if R is not None:
            baby.setdefault(R[0], []).append((j, R[1]))
        R = ec_add(R, P, A, p)
    giant = ec_mul(m_b, P, A, p)
    C = ec_mul(lo, P, A, p)
    found = set()
    for i in range((hi - lo) // m_b + 2):
        base = lo + i * m_b
        if C is None:
            found.add(base)
        else:
            for j, y in baby.get(C[0], ()):
                # jP = -C gives (base + j)P = O; jP = C gives (base - j)P = O
                found.add(base + j if (y + C[1]) % p == 0 else base - j)
        C = ec_add(C, giant, A, p)
    return {m for m in found if lo <= m <= hi}


def ap_bsgs(A: int, B: int, p: int, max_points: int = config.BSGS_MAX_POINTS) -> Optional[int]:
    """
    a(p) from the group order located by baby-step/giant-step.

    Returns None when the order is still ambiguous after max_points random
    points; callers then fall back to the character sum.
    """
    rng = random.Random(p)
    candidates = None
    for _ in range(max_points):
        P = random_point(A, B, p, rng)
        found = _hasse_candidates(P, A, p)
        candidates = found if candidates is None else candidates & found
        if len(candidates) == 1:
            return p + 1 - candidates.pop()
    logger.debug(f"BSGS ambiguous at p={p}: {sorted(candidates or [])}")
    return None


def count_points_naive(curve: WeierstrassCurve, p: int) -> Tuple[int, int]:
    """
    (number of projective points, number of singular points) of the reduced
    general Weierstrass equation, by enumerating F_p x F_p.
    """
    a1, a2, a3, a4, a6 = (a % p for a in curve.coefficients)
    x, y = np.meshgrid(np.arange(p, dtype=np.int64), np.arange(p, dtype=np.int64), indexing='ij')
    F = (y * y + a1 * x * y + a3 * y - (x * x % p) * x - a2 * x * x - a4 * x - a6) % p
    on_curve = F == 0
    Fx = (a1 * y - 3 * x * x - 2 * a2 * x - a4) % p
    Fy = (2 * y + a1 * x + a3) % p
    singular = on_curve & (Fx == 0) & (Fy == 0)
    return int(on_curve.sum()) + 1, int(singular.sum())


def ap_good(curve: WeierstrassCurve, p: int, accelerate: bool = False,
            threshold: int = config.BSGS_THRESHOLD) -> int:
    """a(p) for a prime of good reduction."""
    if invariants(curve).discriminant % p == 0:
        raise ReductionError(f"{curve.name} has bad reduction at {p}")
    if p <= 3:
        total, _ = count_points_naive(curve, p)
        return p + 1 - total
    A, B = curve.short_model(p)
    if accelerate and p > threshold:
        a = ap_bsgs(A, B, p)
        if a is not None:
            return a
    return ap_charsum(A, B, p)


def ap_bad(curve: WeierstrassCurve, p: int) -> int:
    """a(p) in {-1, 0, 1} for a prime dividing the conductor."""
    if not curve.is_bad(p):
        raise ReductionError(f"{curve.name} has good reduction at {p}")
    if p <= 3:
        total, singular = count_points_naive(curve, p)
        return p - (total - singular)
    inv = invariants(curve)
    if inv.c4 % p == 0:
        return 0
    return legendre(-inv.c6, p)


def ap(curve: WeierstrassCurve, p: int, accelerate: bool = False,
       threshold: int = config.BSGS_THRESHOLD) -> int:
    if curve.is_bad(p):
        return ap_bad(curve, p)
    return ap_good(curve, p, accelerate, threshold)
