"""
Fast Legendre transform on 2n Chebyshev samples.

The cascade works on M = 2n points and produces z_l = (1/M) sum_i P_l(x_i) g_i for
l < M. Pairs of truncated Chebyshev series (Z_{l-1}, Z_l) of length S are turned
into two pairs of length S/2 with the associated polynomials Q_{l,K}, R_{l,K}
sampled at the S Chebyshev nodes, which is exact because every product stays
below the aliasing threshold after truncation.
"""
import time
from typing import Dict, Optional, Tuple

import numpy as np
from loguru import logger

from persistent.model.flt import FltLevel, FltPlan
from settings.settings import settings
from utils.errors import InvalidArgumentError
from utils.fct import fct, ifct
from utils.orthopoly import associated_node_values, chebyshev_nodes, fejer_weights, legendre_nodes_extended


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def build_plan(n: int, extended_precision: bool = False) -> FltPlan:
    """
    Precomputes node values of the associated polynomials for every halving step.
    """
    if not _is_power_of_two(n):
        raise InvalidArgumentError(f"FLT size must be a power of two, got {n}")
    started = time.perf_counter()
    m = 2 * n
    levels = []
    size = m
    while size >= 4:
        half = size // 2
        ls = 1 + size * np.arange(m // size)
        q_k, r_k, q_km1, r_km1 = associated_node_values(ls, half, size, extended=extended_precision)
        levels.append(FltLevel(size=size, q_k=q_k, r_k=r_k, q_km1=q_km1, r_km1=r_km1))
        size = half
    rule = fejer_weights(m)
    logger.info(
        "flt.plan built n={} extended={} in {:.3f}s", n, extended_precision, time.perf_counter() - started
    )
    return FltPlan(n=n, extended_precision=extended_precision, nodes=rule.nodes, weights=rule.weights, levels=levels)


def _check_samples(plan: FltPlan, samples: np.ndarray) -> None:
    if samples.shape[-1] != plan.points:
        raise InvalidArgumentError(f"plan of size {plan.n} expects {plan.points} samples, got {samples.shape[-1]}")


def _pad(coeffs: np.ndarray, length: int) -> np.ndarray:
    padded = np.zeros(coeffs.shape[:-1] + (length,), dtype=np.result_type(coeffs, np.float64))
    padded[..., : coeffs.shape[-1]] = coeffs
    return padded


def _epsilon(size: int) -> np.ndarray:
    eps = np.full(size, 2.0)
    eps[0] = 1.0
    return eps


def cascade(plan: FltPlan, g: np.ndarray) -> np.ndarray:
    """
    z_l = (1/M) sum_i P_l(x_i) g_i for l = 0..M-1, batched over leading axes.
    """
    m = plan.points
    lo = fct(g)[..., None, :]
    hi = fct(plan.nodes * g)[..., None, :]
    for level in plan.levels:
        half = level.size // 2
        v_lo = ifct(lo, level.size)
        v_hi = ifct(hi, level.size)
        new_hi = fct(level.q_k * v_hi + level.r_k * v_lo)[..., :half]
        new_lo = fct(level.q_km1 * v_hi + level.r_km1 * v_lo)[..., :half]
        shape = lo.shape[:-2] + (2 * lo.shape[-2], half)
        next_lo = np.empty(shape, dtype=np.result_type(lo, new_lo))
        next_hi = np.empty(shape, dtype=np.result_type(hi, new_hi))
        next_lo[..., 0::2, :] = lo[..., :half]
        next_lo[..., 1::2, :] = new_lo
        next_hi[..., 0::2, :] = hi[..., :half]
        next_hi[..., 1::2, :] = new_hi
        lo, hi = next_lo, next_hi
    z = np.empty(g.shape[:-1] + (m,), dtype=np.result_type(lo, hi))
    z[..., 0::2] = lo[..., 0]
    z[..., 1::2] = hi[..., 0]
    return z


def cascade_transpose(plan: FltPlan, z: np.ndarray) -> np.ndarray:
    """
    Adjoint of cascade, so M * cascade_transpose(c) = sum_l c_l P_l(x_i).
    """
    m = plan.points
    lo = _pad(z[..., 0::2, None], 2)
    hi = _pad(z[..., 1::2, None], 2)
    for level in reversed(plan.levels):
        size = level.size
        half = size // 2
        eps = _epsilon(size)
        a_lo = ifct(_pad(lo[..., 1::2, :], size) * eps / size, size)
        a_hi = ifct(_pad(hi[..., 1::2, :], size) * eps / size, size)
        w_hi = level.q_k * a_hi + level.q_km1 * a_lo
        w_lo = level.r_k * a_hi + level.r_km1 * a_lo
        prev_lo = _pad(lo[..., 0::2, :], size) + fct(w_lo) * size / eps
        prev_hi = _pad(hi[..., 0::2, :], size) + fct(w_hi) * size / eps
        lo, hi = prev_lo, prev_hi
    eps = _epsilon(m)
    lo = _pad(lo[..., 0, :], m)
    hi = _pad(hi[..., 0, :], m)
    return ifct(lo * eps / m, m) + plan.nodes * ifct(hi * eps / m, m)


def flt(plan: FltPlan, samples: np.ndarray) -> np.ndarray:
    """
    c_l = (1/tau_l) sum_i P_l(x_i) f_i w_i for l < n, tau_l = 2/(2l+1).
    """
    samples = np.asarray(samples)
    _check_samples(plan, samples)
    z = cascade(plan, plan.points * plan.weights * samples)
    l = np.arange(plan.n)
    return z[..., : plan.n] * (2 * l + 1) / 2.0


def iflt(plan: FltPlan, coeffs: np.ndarray) -> np.ndarray:
    """
    sum_{l<n} c_l P_l(x_i) at the 2n Chebyshev nodes.
    """
    coeffs = np.asarray(coeffs)
    if coeffs.shape[-1] != plan.n:
        raise InvalidArgumentError(f"plan of size {plan.n} expects {plan.n} coefficients, got {coeffs.shape[-1]}")
    return plan.points * cascade_transpose(plan, _pad(coeffs, plan.points))


def _legendre_rows(n: int):
    """
    Yields (l, P_l at the 2n nodes) for l = 0..n-1 without storing the whole table.
    """
    x = chebyshev_nodes(2 * n)
    p_prev, p = np.zeros_like(x), np.ones_like(x)
    for l in range(n):
        yield l, p
        p_prev, p = p, ((2 * l + 1) * x * p - l * p_prev) / (l + 1)


def dlt(samples: np.ndarray) -> np.ndarray:
    """
    Direct O(n^2) Legendre transform of 2n samples.
    """
    samples = np.asarray(samples)
    if samples.shape[-1] % 2:
        raise InvalidArgumentError("direct Legendre transform expects an even number of samples")
    n = samples.shape[-1] // 2
    weighted = samples * fejer_weights(2 * n).weights
    coeffs = np.empty(samples.shape[:-1] + (n,), dtype=np.result_type(samples, np.float64))
    for l, p in _legendre_rows(n):
        coeffs[..., l] = weighted @ p * (2 * l + 1) / 2.0
    return coeffs


def idlt(coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.asarray(coeffs)
    n = coeffs.shape[-1]
    values = np.zeros(coeffs.shape[:-1] + (2 * n,), dtype=np.result_type(coeffs, np.float64))
    for l, p in _legendre_rows(n):
        values += coeffs[..., l, None] * p
    return values


def idlt_unit_extended(n: int, index: int) -> np.ndarray:
    """
    Samples of P_index at the 2n nodes, accumulated in double-double arithmetic.
    """
    return legendre_nodes_extended(index, 2 * n)


class FltService:
    def __init__(self, extended_precision: Optional[bool] = None) -> None:
        if extended_precision is None:
            extended_precision = settings.flt.extended_precision
        self.extended_precision = extended_precision
        self._plans: Dict[Tuple[int, bool], FltPlan] = {}

    def get_plan(self, n: int) -> FltPlan:
        """
        Возвращает план нужного размера, строит его при первом обращении.
        """
        key = (n, self.extended_precision)
        if key not in self._plans:
            self._plans[key] = build_plan(n, self.extended_precision)
        return self._plans[key]

    def product_transform(self, u: np.ndarray, m_samples: np.ndarray, n: int) -> np.ndarray:
        """
        Legendre coefficients of (sum_l u_l P_l) * m on the transform of size n,
        where m is given by its 2n samples.
        """
        plan = self.get_plan(n)
        u_samples = iflt(plan, _pad(u, n))
        return flt(plan, u_samples * m_samples)
