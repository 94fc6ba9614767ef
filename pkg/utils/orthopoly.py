from typing import Tuple, Union

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.fft import dct

from persistent.model.quadrature import AssociatedPolyTable, QuadratureRule, RecurrenceCoeffs
from utils import ddouble
from utils.errors import InvalidArgumentError

ArrayLike = Union[float, np.ndarray]


def legendre_recurrence(k: ArrayLike) -> RecurrenceCoeffs:
    """
    Коэффициенты трёхчленной рекурсии Лежандра: A_k = (2k+1)/(k+1), B_k = 0, C_k = -k/(k+1).
    """
    k = np.asarray(k, dtype=np.float64)
    return RecurrenceCoeffs(A=(2 * k + 1) / (k + 1), B=np.zeros_like(k), C=-k / (k + 1))


def chebyshev_nodes(n: int) -> np.ndarray:
    """
    x_i = cos((2i+1)pi/(2n)), i = 0..n-1, strictly decreasing.

    Evaluated as sin((n-1-2i)pi/(2n)) so the middle node of odd sizes is exactly 0
    and the set is exactly symmetric.
    """
    if n < 1:
        raise InvalidArgumentError(f"node count must be positive, got {n}")
    i = np.arange(n)
    return np.sin((n - 1 - 2 * i) * np.pi / (2 * n))


def fejer_weights(n: int) -> QuadratureRule:
    """
    Weights of the interpolatory rule at chebyshev_nodes(n) on [-1, 1].

    The cosine moments alpha_m = int_0^pi cos(m t) sin(t) dt are 2/(1-m^2) for even m
    and vanish for odd m.
    """
    if n < 1:
        raise InvalidArgumentError(f"node count must be positive, got {n}")
    m = np.arange(n)
    alpha = np.zeros(n)
    even = m % 2 == 0
    alpha[even] = 2.0 / (1.0 - m[even].astype(np.float64) ** 2)
    weights = dct(alpha, type=3) / n
    return QuadratureRule(nodes=chebyshev_nodes(n), weights=weights)


def clenshaw_curtis(n: int) -> QuadratureRule:
    """
    (n+1)-point Clenshaw-Curtis rule on [-1, 1], nodes cos(j pi/n) in decreasing order.
    """
    if n < 1:
        raise InvalidArgumentError(f"Clenshaw-Curtis order must be positive, got {n}")
    theta = np.pi * np.arange(n + 1) / n
    nodes = np.cos(theta)
    weights = np.zeros(n + 1)
    v = np.ones(n - 1)
    if n % 2 == 0:
        weights[0] = weights[n] = 1.0 / (n ** 2 - 1)
        for j in range(1, n // 2):
            v -= 2.0 * np.cos(2 * j * theta[1:-1]) / (4 * j ** 2 - 1)
        v -= np.cos(n * theta[1:-1]) / (n ** 2 - 1)
    else:
        weights[0] = weights[n] = 1.0 / n ** 2
        for j in range(1, (n - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * j * theta[1:-1]) / (4 * j ** 2 - 1)
    weights[1:-1] = 2.0 * v / n
    return QuadratureRule(nodes=nodes, weights=weights)


def _check_interval(x: np.ndarray) -> None:
    if np.any(np.abs(x) > 1.0):
        raise InvalidArgumentError("Legendre evaluation requires |x| <= 1")


def legendre_eval(n: int, x: ArrayLike) -> ArrayLike:
    """
    P_n(x) by upward three-term recurrence.
    """
    if n < 0:
        raise InvalidArgumentError(f"Legendre degree must be non-negative, got {n}")
    xa = np.asarray(x, dtype=np.float64)
    _check_interval(xa)
    result = legendre_table(n, xa)[n]
    return float(result) if np.ndim(x) == 0 else result


def legendre_table(n_max: int, x: ArrayLike) -> np.ndarray:
    """
    P_0..P_{n_max} at x, shape (n_max + 1,) + x.shape.
    """
    x = np.asarray(x, dtype=np.float64)
    table = np.empty((n_max + 1,) + x.shape)
    table[0] = 1.0
    if n_max >= 1:
        table[1] = x
    for k in range(1, n_max):
        table[k + 1] = ((2 * k + 1) * x * table[k] - k * table[k - 1]) / (k + 1)
    return table


def legendre_derivative_table(n_max: int, x: ArrayLike) -> np.ndarray:
    """
    P_0'..P_{n_max}' at x from P_{k+1}' = (k+1) P_k + x P_k'.
    """
    x = np.asarray(x, dtype=np.float64)
    values = legendre_table(n_max, x)
    deriv = np.zeros_like(values)
    for k in range(n_max):
        deriv[k + 1] = (k + 1) * values[k] + x * deriv[k]
    return deriv


def associated_polys(l: int, m_max: int) -> AssociatedPolyTable:
    """
    Q_{l,m}, R_{l,m} for m = 0..m_max as Chebyshev series, so that
    P_{l+m} = Q_{l,m} P_l + R_{l,m} P_{l-1}.
    """
    if l < 1:
        raise InvalidArgumentError(f"associated polynomials need l >= 1, got {l}")
    if m_max < 0:
        raise InvalidArgumentError(f"m_max must be non-negative, got {m_max}")
    rec = legendre_recurrence(np.arange(l, l + m_max))
    q_prev, q = np.zeros(1), np.ones(1)
    r_prev, r = np.ones(1), np.zeros(1)
    qs, rs = [q], [r]
    for m in range(1, m_max + 1):
        a, b, c = rec.A[m - 1], rec.B[m - 1], rec.C[m - 1]
        q_next = cheb.chebadd(cheb.chebadd(a * cheb.chebmulx(q), b * q), c * q_prev)
        r_next = cheb.chebadd(cheb.chebadd(a * cheb.chebmulx(r), b * r), c * r_prev)
        q_prev, q = q, q_next[: m + 1]
        r_prev, r = r, r_next[: max(m, 1)]
        qs.append(q)
        rs.append(r)
    return AssociatedPolyTable(l=l, Q=qs, R=rs)


def associated_node_values(
    ls: np.ndarray, m: int, n_points: int, extended: bool = False
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Values of Q_{l,m}, R_{l,m}, Q_{l,m-1}, R_{l,m-1} at chebyshev_nodes(n_points)
    for every l in ls; each result has shape (len(ls), n_points).

    With extended=True the recurrence runs in double-double arithmetic and the
    results are rounded to float64 at the end.
    """
    ls = np.asarray(ls, dtype=np.int64)
    if m < 1:
        raise InvalidArgumentError(f"m must be at least 1, got {m}")
    if extended:
        return _associated_node_values_dd(ls, m, n_points)
    x = chebyshev_nodes(n_points)[None, :]
    shape = (ls.size, n_points)
    q_prev, q = np.zeros(shape), np.ones(shape)
    r_prev, r = np.ones(shape), np.zeros(shape)
    for step in range(m):
        rec = legendre_recurrence(ls + step)
        a, b, c = rec.A[:, None], rec.B[:, None], rec.C[:, None]
        q_prev, q = q, (a * x + b) * q + c * q_prev
        r_prev, r = r, (a * x + b) * r + c * r_prev
    return q, r, q_prev, r_prev


def _associated_node_values_dd(ls: np.ndarray, m: int, n_points: int):
    x_hi, x_lo = ddouble.chebyshev_nodes_dd(n_points)
    x = (np.broadcast_to(x_hi, (ls.size, n_points)), np.broadcast_to(x_lo, (ls.size, n_points)))
    shape = (ls.size, n_points)
    zero, one = ddouble.dd_const(np.zeros(shape)), ddouble.dd_const(np.ones(shape))
    q_prev, q = zero, one
    r_prev, r = one, zero
    for step in range(m):
        k = (ls + step).astype(np.float64)[:, None]
        a = ddouble.dd_ratio(2 * k + 1, k + 1)
        c = ddouble.dd_ratio(-k, k + 1)
        ax = ddouble.dd_mul(a, x)
        q_prev, q = q, ddouble.dd_add(ddouble.dd_mul(ax, q), ddouble.dd_mul(c, q_prev))
        r_prev, r = r, ddouble.dd_add(ddouble.dd_mul(ax, r), ddouble.dd_mul(c, r_prev))
    return tuple(ddouble.dd_to_float(v) for v in (q, r, q_prev, r_prev))


def legendre_nodes_extended(n: int, n_points: int) -> np.ndarray:
    """
    P_n at chebyshev_nodes(n_points), recurrence carried in double-double.
    """
    x = ddouble.chebyshev_nodes_dd(n_points)
    p_prev = ddouble.dd_const(np.zeros(n_points))
    p = ddouble.dd_const(np.ones(n_points))
    for k in range(n):
        a = ddouble.dd_ratio(np.float64(2 * k + 1), np.float64(k + 1))
        c = ddouble.dd_ratio(np.float64(-k), np.float64(k + 1))
        p_prev, p = p, ddouble.dd_add(ddouble.dd_mul(ddouble.dd_mul(a, x), p), ddouble.dd_mul(c, p_prev))
    return ddouble.dd_to_float(p)
