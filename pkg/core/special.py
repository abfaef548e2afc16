"""Complex log-gamma, polygamma and the upper incomplete gamma function."""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import mpmath
import numpy as np
from scipy import special

import config
from core.errors import DomainError, PoleError, PrecisionError

logger = logging.getLogger(__name__)

_FPMIN = 1e-300
_EPS = np.finfo(float).eps

ArrayLike = Union[complex, np.ndarray]


@dataclass(frozen=True)
class ComplexEval:
    """A complex value with a conservative absolute error bound."""

    value: complex
    abs_error_bound: float = 0.0

    def __post_init__(self):
        if not (self.abs_error_bound >= 0.0) or math.isinf(self.abs_error_bound):
            raise PrecisionError("error bound is not finite", self.abs_error_bound)

    @property
    def real(self) -> float:
        return self.value.real

    @property
    def imag(self) -> float:
        return self.value.imag

    def __abs__(self) -> float:
        return abs(self.value)

    def __complex__(self) -> complex:
        return complex(self.value)

    @staticmethod
    def _wrap(other) -> "ComplexEval":
        return other if isinstance(other, ComplexEval) else ComplexEval(complex(other), 0.0)

    def __add__(self, other) -> "ComplexEval":
        o = self._wrap(other)
        return ComplexEval(self.value + o.value, self.abs_error_bound + o.abs_error_bound)

    __radd__ = __add__

    def __sub__(self, other) -> "ComplexEval":
        o = self._wrap(other)
        return ComplexEval(self.value - o.value, self.abs_error_bound + o.abs_error_bound)

    def __rsub__(self, other) -> "ComplexEval":
        return self._wrap(other) - self

    def __neg__(self) -> "ComplexEval":
        return ComplexEval(-self.value, self.abs_error_bound)

    def __mul__(self, other) -> "ComplexEval":
        o = self._wrap(other)
        err = (abs(self.value) * o.abs_error_bound + abs(o.value) * self.abs_error_bound
               + self.abs_error_bound * o.abs_error_bound)
        return ComplexEval(self.value * o.value, err)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ComplexEval":
        o = self._wrap(other)
        denom = abs(o.value)
        if denom <= o.abs_error_bound:
            raise PrecisionError("divisor indistinguishable from zero", o.abs_error_bound)
        err = (abs(self.value) * o.abs_error_bound + denom * self.abs_error_bound) / (
            denom * (denom - o.abs_error_bound))
        return ComplexEval(self.value / o.value, err)

    def __rtruediv__(self, other) -> "ComplexEval":
        return self._wrap(other) / self


def _pole_order(z: complex) -> Optional[int]:
    """m when z = -m is a pole of Gamma, else None."""
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        return int(-z.real)
    return None


def _check_pole(z: complex) -> None:
    if _pole_order(z) is not None:
        raise PoleError(f"gamma has a pole at {complex(z).real:g}")


def loggamma(z: complex) -> ComplexEval:
    """Principal log Gamma, continuous off the negative real axis."""
    _check_pole(z)
    v = complex(special.loggamma(complex(z)))
    return ComplexEval(v, 4 * _EPS * max(1.0, abs(v)))


def digamma(z: complex) -> ComplexEval:
    _check_pole(z)
    v = complex(special.psi(complex(z)))
    return ComplexEval(v, 8 * _EPS * max(1.0, abs(v)))


def trigamma(z: complex) -> ComplexEval:
    _check_pole(z)
    v = complex(mpmath.psi(1, complex(z)))
    return ComplexEval(v, 4 * _EPS * max(1.0, abs(v)))


def _series(z: complex, x: np.ndarray, log_scale: float, max_iter: int, accuracy: float
            ) -> Tuple[np.ndarray, np.ndarray]:
    """Gamma(z) - gamma(z, x), scaled by exp(-log_scale)."""
    term = np.full(x.shape, 1.0 / z, dtype=complex)
    total = term.copy()
    magnitude = np.abs(term)
    active = np.ones(x.shape, dtype=bool)
    zn = z
    for _ in range(max_iter):
        zn += 1
        term[active] *= x[active] / zn
        total[active] += term[active]
        magnitude[active] += np.abs(term[active])
        active &= np.abs(term) > accuracy * np.abs(total)
        if not active.any():
            break
    else:
        raise PrecisionError(f"incomplete gamma series did not converge for z={z}",
                             float(np.max(np.abs(term[active]) / np.abs(total[active]))))
    prefactor = np.exp(z * np.log(x) - x - log_scale)
    full = np.exp(complex(special.loggamma(z)) - log_scale)
    value = full - prefactor * total
    err = 4 * _EPS * (np.abs(full) + np.abs(prefactor) * magnitude) + np.abs(prefactor) * accuracy * np.abs(total)
    return value, err


def _continued_fraction(z: complex, x: np.ndarray, log_scale: float, max_iter: int, accuracy: float
                        ) -> Tuple[np.ndarray, np.ndarray]:
    """Lentz evaluation of the Legendre continued fraction, scaled by exp(-log_scale)."""
    b = x + 1.0 - z
    c = np.full(x.shape, 1.0 / _FPMIN, dtype=complex)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    n_iter = 0
    for i in range(1, max_iter + 1):
        n_iter = i
        an = -i * (i - z)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = b + an / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) >= accuracy
        if not active.any():
            break
    else:
        raise PrecisionError(f"incomplete gamma continued fraction did not converge for z={z}",
                             float(np.max(np.abs(delta[active] - 1.0))))
    value = np.exp(z * np.log(x) - x - log_scale) * h
    err = (accuracy + 2 * _EPS * math.sqrt(n_iter)) * np.abs(value)
    return value, err


def _negative_integer_order(m: int, x: np.ndarray, log_scale: float) -> Tuple[np.ndarray, np.ndarray]:
    """Gamma(-m, x) scaled by exp(-log_scale), recursing down from Gamma(0, x) = E1(x)."""
    g = special.exp1(x)
    magnitude = np.abs(g)
    ex = np.exp(-x)
    for k in range(1, m + 1):
        head = x ** (-k) * ex
        g = (head - g) / k
        magnitude = (np.abs(head) + magnitude) / k
    scale = math.exp(-log_scale)
    value = g * scale
    err = 8 * _EPS * (m + 1) * magnitude * scale
    return value, err


def inc_gamma_upper_array(z: complex, x: ArrayLike, log_scale: float = 0.0, method: str = 'auto',
                          max_iter: int = config.INC_GAMMA_MAX_ITERATIONS,
                          accuracy: float = config.INC_GAMMA_ACCURACY) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorized Gamma(z, x) * exp(-log_scale) for complex x with |arg x| < pi.

    Power series for |x| < |z| + 1, continued fraction above; `method`
    forces one of them ('series' or 'continued_fraction'). At z = 0, -1, -2, ...
    the series is undefined, so |x| < 1 recurses down from E1(x) instead.

    Returns:
        (values, absolute error bounds), both shaped like x
    """
    z = complex(z)
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    values = np.empty(x.shape, dtype=complex)
    errors = np.empty(x.shape, dtype=float)
    pole_order = _pole_order(z)
    if method == 'series':
        use_series = np.ones(x.shape, dtype=bool)
    elif pole_order is not None:
        # Gamma(-m, x) is finite for x != 0; small |x| recurses from E1
        small = np.abs(x) < 1.0
        if small.any():
            values[small], errors[small] = _negative_integer_order(pole_order, x[small], log_scale)
        if (~small).any():
            values[~small], errors[~small] = _continued_fraction(
                z, x[~small], log_scale, max_iter, accuracy)
        return values, errors
    elif method == 'continued_fraction':
        use_series = np.zeros(x.shape, dtype=bool)
    else:
        use_series = np.abs(x) < abs(z) + 1.0
    if use_series.any():
        _check_pole(z)
        values[use_series], errors[use_series] = _series(z, x[use_series], log_scale, max_iter, accuracy)
    if (~use_series).any():
        values[~use_series], errors[~use_series] = _continued_fraction(
            z, x[~use_series], log_scale, max_iter, accuracy)
    return values, errors


def inc_gamma_upper(z: complex, x: float, method: str = 'auto') -> ComplexEval:
    """Upper incomplete gamma Gamma(z, x) for real x > 0."""
    if not x > 0:
        raise DomainError(f"incomplete gamma needs x > 0, got {x}")
    values, errors = inc_gamma_upper_array(z, np.array([x], dtype=complex), method=method)
    return ComplexEval(complex(values[0]), float(errors[0]))
