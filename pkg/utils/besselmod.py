"""
Modified spherical Bessel functions

    jt_n(r) = (2n+1)!! j_n(r) / r^n,    yt_n(r) = -r^(n+1) y_n(r) / (2n-1)!!

with the growth in r^n factored out, so both families equal 1 at r = 0 and stay
in a well-scaled range for the orders the solver uses. Tables have shape
(n_max + 1,) + r.shape.
"""
import math
from typing import Optional, Union

import numpy as np

from settings.settings import settings
from utils.errors import InvalidArgumentError

ArrayLike = Union[float, np.ndarray]


def _check_argument(rho: np.ndarray) -> None:
    if np.any(rho < 0):
        raise InvalidArgumentError("modified Bessel functions need a non-negative argument")


def _series(n: int, rho: np.ndarray, max_terms: int) -> np.ndarray:
    half_sq = -0.5 * rho * rho
    term = np.ones_like(rho)
    total = np.ones_like(rho)
    for k in range(1, max_terms + 1):
        term = term * half_sq / (k * (2 * n + 2 * k + 1))
        total = total + term
        if k >= settings.bessel.series_terms and np.all(np.abs(term) <= 1e-18 * np.abs(total)):
            break
    return total


def start_order(n_max: int, rho_max: float) -> int:
    """
    Seed order of the downward recurrence.

    Above r^2/4 the series terms decrease from the first one, so the seeds carry no
    cancellation error.
    """
    margin = settings.bessel.start_margin
    return max(n_max + math.ceil(rho_max) + margin, math.ceil(rho_max * rho_max / 4.0) + margin)


def jtilde_table(n_max: int, rho: ArrayLike) -> np.ndarray:
    """
    jt_0..jt_{n_max}(rho) by downward recurrence
    jt_{n-1} = jt_n - r^2 jt_{n+1} / ((2n+1)(2n+3)), seeded from the power series.
    """
    rho = np.asarray(rho, dtype=np.float64)
    _check_argument(rho)
    if n_max < 0:
        raise InvalidArgumentError(f"n_max must be non-negative, got {n_max}")
    rho_max = float(np.max(rho)) if rho.size else 0.0
    n_start = start_order(n_max, rho_max)
    max_terms = max(settings.bessel.series_terms, 400)
    upper = _series(n_start + 1, rho, max_terms)
    current = _series(n_start, rho, max_terms)
    table = np.empty((n_max + 1,) + rho.shape)
    if n_start <= n_max:
        table[n_start] = current
    rho_sq = rho * rho
    for n in range(n_start, 0, -1):
        lower = current - rho_sq * upper / ((2 * n + 1) * (2 * n + 3))
        upper, current = current, lower
        if n - 1 <= n_max:
            table[n - 1] = current
    return table


def jtilde_column(n_max: int, rho: float) -> np.ndarray:
    return jtilde_table(n_max, np.float64(rho))


def ytilde_table(n_max: int, rho: ArrayLike) -> np.ndarray:
    """
    yt_0..yt_{n_max}(rho) by upward recurrence
    yt_{n+1} = yt_n - r^2 yt_{n-1} / ((2n-1)(2n+1)), yt_0 = cos r, yt_1 = cos r + r sin r.
    """
    rho = np.asarray(rho, dtype=np.float64)
    _check_argument(rho)
    if n_max < 0:
        raise InvalidArgumentError(f"n_max must be non-negative, got {n_max}")
    table = np.empty((n_max + 1,) + rho.shape)
    table[0] = np.cos(rho)
    if n_max >= 1:
        table[1] = np.cos(rho) + rho * np.sin(rho)
    rho_sq = rho * rho
    for n in range(1, n_max):
        table[n + 1] = table[n] - rho_sq * table[n - 1] / ((2 * n - 1) * (2 * n + 1))
    return table


def ytilde_column(n_max: int, rho: float) -> np.ndarray:
    return ytilde_table(n_max, np.float64(rho))


def jtilde_derivative(n_max: int, rho: ArrayLike, table: Optional[np.ndarray] = None) -> np.ndarray:
    """
    d/dr jt_n = -r jt_{n+1} / (2n+3); table, if given, must reach order n_max + 1.
    """
    rho = np.asarray(rho, dtype=np.float64)
    if table is None:
        table = jtilde_table(n_max + 1, rho)
    n = np.arange(n_max + 1).reshape((-1,) + (1,) * rho.ndim)
    return -rho * table[1 : n_max + 2] / (2 * n + 3)


def ytilde_derivative(n_max: int, rho: ArrayLike, table: Optional[np.ndarray] = None) -> np.ndarray:
    """
    d/dr yt_n = r yt_{n-1} / (2n-1) for n >= 1 and d/dr yt_0 = -sin r.
    """
    rho = np.asarray(rho, dtype=np.float64)
    if table is None:
        table = ytilde_table(n_max, rho)
    deriv = np.empty((n_max + 1,) + rho.shape)
    deriv[0] = -np.sin(rho)
    n = np.arange(1, n_max + 1).reshape((-1,) + (1,) * rho.ndim)
    deriv[1:] = rho * table[:n_max] / (2 * n - 1)
    return deriv


def power_over_double_factorial(n_max: int, z: ArrayLike, shift: int) -> np.ndarray:
    """
    z^n / (2n + shift)!! for n = 0..n_max, shift is -1 or +1, built by ratios so the
    double factorial is never formed.
    """
    if shift not in (-1, 1):
        raise InvalidArgumentError(f"shift must be -1 or 1, got {shift}")
    z = np.asarray(z)
    table = np.empty((n_max + 1,) + z.shape, dtype=np.result_type(z, np.float64))
    table[0] = 1.0
    for n in range(1, n_max + 1):
        table[n] = table[n - 1] * z / (2 * n + shift)
    return table


def power_ratio(a: ArrayLike, b: ArrayLike, n: ArrayLike) -> ArrayLike:
    """
    (a/b)^n for 0 <= a <= b, b > 0, as exp(n log1p((a-b)/b)); exactly 1 when a == b.
    """
    a_arr = np.asarray(a, dtype=np.float64)
    b_arr = np.asarray(b, dtype=np.float64)
    n_arr = np.asarray(n, dtype=np.float64)
    if np.any(b_arr <= 0) or np.any(a_arr < 0):
        raise InvalidArgumentError("power_ratio needs 0 <= a and b > 0")
    if np.any(a_arr > b_arr):
        raise InvalidArgumentError("power_ratio needs a <= b")
    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratio = np.log1p((a_arr - b_arr) / b_arr)
        result = np.exp(n_arr * log_ratio)
    result = np.where(n_arr == 0, 1.0, result)
    result = np.where((a_arr == 0) & (n_arr > 0), 0.0, result)
    return float(result) if result.ndim == 0 else result
