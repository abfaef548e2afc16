"""
Ratios-conjecture predictions with lower-order terms: the one-level density of
zeros of L(s, chi_d) and the pair correlation of zeta zeros.
"""
import cmath
import logging
import math
from typing import Callable, Iterable, Tuple

import numpy as np
from scipy import integrate

import config
from core.errors import PrecisionError, ValidationError
from core.special import digamma, loggamma
from core.zeta import zeta, zeta_logderiv, zeta_logderiv_prime
from predict.euler_products import A_D, A_D_prime, A_pc, B_pc

logger = logging.getLogger(__name__)


def even_guarded(f: Callable[[float], float], x: float,
                 guard: float = config.SINGULAR_GUARD) -> float:
    """
    f(x) for an even function with a removable singularity at 0.

    Below the guard the value comes from f(h) and f(2h), h = guard, by
    Richardson extrapolation in x^2.
    """
    if abs(x) >= guard:
        return f(x)
    f1, f2 = f(guard), f(2 * guard)
    f0 = (4 * f1 - f2) / 3
    return f0 + (f1 - f0) * (x / guard) ** 2


def _gamma_shift(d: int) -> float:
    return 0.25 if d > 0 else 0.75


def _density_raw(log_conductor: float, twist: complex, shift: float, t: float,
                 lower_terms: bool) -> float:
    """The integrand for mean log(|d|/pi) = log_conductor and mean (|d|/pi)^-it = twist."""
    s = complex(shift, t / 2)
    main = log_conductor + digamma(s).real
    if not lower_terms:
        return main / (2 * math.pi)
    gamma_ratio = cmath.exp(loggamma(complex(shift, -t / 2)).value - loggamma(s).value)
    lower = (zeta_logderiv(complex(1, 2 * t)).value + A_D_prime(1j * t).value
             - twist * gamma_ratio * zeta(complex(1, -2 * t)).value * A_D(1j * t).value)
    return (main + 2 * lower.real) / (2 * math.pi)


def cs_density_integrand(d: int, t: float, lower_terms: bool = True) -> float:
    """
    Predicted density at height t of zeros of L(s, chi_d):

    (1/2pi) Re[log(|d|/pi) + psi(1/4 + it/2) + 2(zeta'/zeta(1+2it) + A'_D(it)
        - (|d|/pi)^(-it) Gamma(1/4 - it/2)/Gamma(1/4 + it/2) zeta(1-2it) A_D(-it; it))]

    with 3/4 in place of 1/4 for d < 0. The poles at t = 0 cancel; small |t|
    goes through even_guarded.
    """
    if d == 0:
        raise ValidationError("d must be nonzero")
    log_cond = math.log(abs(d) / math.pi)
    shift = _gamma_shift(d)

    def f(x: float) -> float:
        return _density_raw(log_cond, cmath.exp(-1j * x * log_cond), shift, x, lower_terms)

    return even_guarded(f, t) if lower_terms else f(t)


def cs_density_averaged(discriminants: Iterable[int], t: float, lower_terms: bool = True) -> float:
    """
    The density averaged over a family of same-sign discriminants. The integrand
    is linear in log(|d|/pi) and (|d|/pi)^-it, so only their means enter.
    """
    ds = np.array(list(discriminants), dtype=np.float64)
    if ds.size == 0:
        raise ValidationError("empty discriminant family")
    if not (np.all(ds > 0) or np.all(ds < 0)):
        raise ValidationError("discriminant family mixes signs")
    logs = np.log(np.abs(ds) / math.pi)
    log_cond = float(logs.mean())
    shift = _gamma_shift(int(ds[0]))

    def f(x: float) -> float:
        twist = complex(np.mean(np.exp(-1j * x * logs)))
        return _density_raw(log_cond, twist, shift, x, lower_terms)

    return even_guarded(f, t) if lower_terms else f(t)


def _log_squared_integral(T: float) -> float:
    """integral_0^T log(t/2pi)^2 dt."""
    L = math.log(T / (2 * math.pi))
    return T * (L * L - 2 * L + 2)


def paircorr_r_integrand(T: float, r: float, lower_terms: bool = True) -> float:
    """
    Re of the t-integral over (0, T) of
    log(t/2pi)^2 + 2((zeta'/zeta)'(1+ir) + (t/2pi)^(-ir) zeta(1-ir) zeta(1+ir) A(ir) - B(ir)).
    """
    main = _log_squared_integral(T)
    if not lower_terms:
        return main

    def f(x: float) -> float:
        twist = T * cmath.exp(-1j * x * math.log(T / (2 * math.pi))) / (1 - 1j * x)
        lower = (T * zeta_logderiv_prime(complex(1, x)).value
                 + twist * zeta(complex(1, -x)).value * zeta(complex(1, x)).value * A_pc(1j * x).value
                 - T * B_pc(1j * x).value)
        return main + 2 * lower.real

    return even_guarded(f, r)


def cs_paircorr_prediction(T: float, bin_edges: Tuple[float, float], lower_terms: bool = True,
                           epsrel: float = 1e-7) -> float:
    """
    Expected number of ordered pairs of zeta zeros up to T whose difference
    falls in the bin: (1/(2pi)^2) times the integral over the bin of
    paircorr_r_integrand.

    Raises:
        PrecisionError: the quadrature reports failure
    """
    a, b = map(float, bin_edges)
    if not T > 0:
        raise ValidationError(f"T must be positive, got {T}")
    if not -T < a < b < T:
        raise ValidationError(f"bin [{a}, {b}) must lie inside (-T, T)")
    points = [0.0] if a < 0 < b else None
    epsabs = 1e-2 * epsrel * _log_squared_integral(T) * (b - a)
    result = integrate.quad(lambda r: paircorr_r_integrand(T, r, lower_terms), a, b, epsrel=epsrel,
                            epsabs=epsabs, limit=200, points=points, full_output=1)
    value, abserr = result[0], result[1]
    if len(result) > 3:
        raise PrecisionError(f"pair-correlation quadrature on [{a}, {b}) failed: {result[3]}", abserr)
    return value / (2 * math.pi) ** 2
