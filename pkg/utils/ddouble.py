"""
Double-double arithmetic on numpy arrays.

A value is a pair (hi, lo) of float64 arrays with |lo| <= ulp(hi)/2, which gives
about 106 bits of mantissa. Only the handful of operations the FLT plans and the
extended-precision Legendre synthesis need are provided.
"""
from functools import lru_cache
from typing import Tuple

import mpmath
import numpy as np

DD = Tuple[np.ndarray, np.ndarray]

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a: np.ndarray, b: np.ndarray) -> DD:
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def quick_two_sum(a: np.ndarray, b: np.ndarray) -> DD:
    # requires |a| >= |b|
    s = a + b
    err = b - (s - a)
    return s, err


def _split(a: np.ndarray) -> DD:
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def two_prod(a: np.ndarray, b: np.ndarray) -> DD:
    p = a * b
    a_hi, a_lo = _split(a)
    b_hi, b_lo = _split(b)
    err = ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo
    return p, err


def dd_add(x: DD, y: DD) -> DD:
    s, e = two_sum(x[0], y[0])
    t, f = two_sum(x[1], y[1])
    e = e + t
    s, e = quick_two_sum(s, e)
    e = e + f
    return quick_two_sum(s, e)


def dd_mul(x: DD, y: DD) -> DD:
    p, e = two_prod(x[0], y[0])
    e = e + (x[0] * y[1] + x[1] * y[0])
    return quick_two_sum(p, e)


def dd_ratio(numerator: np.ndarray, denominator: np.ndarray) -> DD:
    """
    numerator/denominator for exactly representable operands (integers in practice).
    """
    a = np.asarray(numerator, dtype=np.float64)
    b = np.asarray(denominator, dtype=np.float64)
    q1 = a / b
    p, e = two_prod(q1, b)
    r = (a - p) - e
    q2 = r / b
    return quick_two_sum(q1, q2)


def dd_const(value: np.ndarray) -> DD:
    value = np.asarray(value, dtype=np.float64)
    return value, np.zeros_like(value)


def dd_to_float(x: DD) -> np.ndarray:
    return x[0] + x[1]


@lru_cache(maxsize=64)
def chebyshev_nodes_dd(n: int) -> DD:
    """
    Chebyshev nodes cos((2i+1)pi/(2n)) rounded to double-double via mpmath.
    """
    hi = np.empty(n)
    lo = np.empty(n)
    with mpmath.workdps(40):
        for i in range(n):
            v = mpmath.cos((2 * i + 1) * mpmath.pi / (2 * n))
            h = float(v)
            hi[i] = h
            lo[i] = float(v - h)
    hi.flags.writeable = False
    lo.flags.writeable = False
    return hi, lo
