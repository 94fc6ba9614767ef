"""
Radial part of the modal operator.

For one mode n the kernel applied to a radial density I(rho) is

    K(r) = i [yt_n(kr) S(r) + jt_n(kr) Q(r)] - k^3 s_n(kr) jt_n(kr) A,
    S(r) = int_0^r (p/r)^(n+1) jt_n(kp) I(p) k^2 p dp,
    Q(r) = int_r^R (r/p)^n yt_n(kp) I(p) k^2 p dp,
    A    = int_0^R g_n(kp) jt_n(kp) I(p) p^2 dp,

with s_n(z) = z^n/(2n-1)!! and g_n(z) = z^n/(2n+1)!!. I is a Chebyshev
interpolant on every interval, so S and Q reduce to moment tables swept over the
sub-node segments in O(1) work per node.
"""
import math
import time
from typing import Optional, Tuple

import numpy as np
from loguru import logger
from numpy.polynomial import chebyshev as cheb

from infrastructure.parallel.executor import parallel_map
from persistent.model.radial import ModalField, MomentTable, RadialGrid, SweepTables
from repository.moment_cache_repository import MomentCacheRepository
from settings.settings import settings
from utils.besselmod import jtilde_table, power_over_double_factorial, power_ratio, ytilde_table
from utils.errors import InvalidArgumentError, MomentCacheError, QuadratureConvergenceError
from utils.fct import fct
from utils.orthopoly import chebyshev_nodes, clenshaw_curtis

_MAX_GRADING = 50


def build_grid(r_max: float, n_i: int, n_d: int) -> RadialGrid:
    if n_i < 1 or n_d < 1:
        raise InvalidArgumentError(f"grid needs positive counts, got n_i={n_i}, n_d={n_d}")
    if r_max <= 0:
        raise InvalidArgumentError(f"grid radius must be positive, got {r_max}")
    edges = r_max * np.arange(n_i + 1) / n_i
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = chebyshev_nodes(n_d)[::-1]
    nodes = mid[:, None] + half[:, None] * x[None, :]
    return RadialGrid(r_max=r_max, n_i=n_i, n_d=n_d, edges=edges, nodes=nodes)


def fit_radial(grid: RadialGrid, samples: np.ndarray) -> np.ndarray:
    """
    Chebyshev coefficients c_m^j of the interpolant through the n_d nodes of every
    interval; samples and result are shaped (n_i, n_d, ...) with m on axis 1.
    """
    samples = np.asarray(samples)
    if samples.shape[:2] != (grid.n_i, grid.n_d):
        raise InvalidArgumentError(f"samples of shape {samples.shape} do not match the grid")
    # nodes increase along axis 1, fct expects the decreasing order
    moved = np.moveaxis(samples, 1, -1)[..., ::-1]
    return np.moveaxis(fct(moved), -1, 1)


def interpolate_field(grid: RadialGrid, field: ModalField, rho: np.ndarray) -> np.ndarray:
    """
    Values of every mode at arbitrary radii in [0, r_max], shape (len(rho), F + 1).
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=np.float64))
    if np.any(rho < 0) or np.any(rho > grid.r_max * (1 + 1e-14)):
        raise InvalidArgumentError(f"radii must lie in [0, {grid.r_max}]")
    coeffs = fit_radial(grid, field.values)
    j = np.clip(np.floor(rho / grid.width).astype(int), 0, grid.n_i - 1)
    t = np.clip((rho - grid.midpoints[j]) / (0.5 * grid.width), -1.0, 1.0)
    vander = cheb.chebvander(t, grid.n_d - 1)
    return np.einsum("pm,pml->pl", vander, coeffs[j])


def _graded_breakpoints(b: float, e: float, F: int) -> np.ndarray:
    h = e - b
    points = [b, e]
    right = min(_MAX_GRADING, max(0, math.ceil(math.log2((F + 2) * h / e))))
    points += [e - h * 2.0 ** -p for p in range(1, right + 1)]
    if b > 0:
        left = min(_MAX_GRADING, max(0, math.ceil(math.log2((F + 1) * h / b))))
        points += [b + h * 2.0 ** -p for p in range(1, left + 1)]
    return np.unique(np.array(points))


def _composite_rule(breaks: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
    rule = clenshaw_curtis(order)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (hi - lo)
    x = (0.5 * (hi + lo) + half * rule.nodes[None, :]).reshape(-1)
    w = (half * rule.weights[None, :]).reshape(-1)
    return np.clip(x, breaks[0], breaks[-1]), w


def _segment_integrands(
    b: float, e: float, rho: np.ndarray, F: int, k: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = np.arange(F + 1)[:, None]
    z = k * rho
    jt = jtilde_table(F, z)
    yt = ytilde_table(F, z)
    weight = k * k * rho
    alpha = power_ratio(rho[None, :], e, n + 1) * jt * weight
    if b > 0:
        beta = power_ratio(b, rho[None, :], n) * yt * weight
    else:
        beta = np.where(n == 0, 1.0, 0.0) * yt * weight
    gamma = power_over_double_factorial(F, z, 1) * jt * rho * rho
    return alpha, beta, gamma


def segment_moments(
    b: float, e: float, mid: float, half: float, F: int, k: float, index: Tuple[int, int] = (0, 0), n_d: int = 1
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    alpha, beta, gamma of the segment [b, e] for modes 0..F and Chebyshev degrees
    0..n_d-1 of the interval with the given midpoint and half-width; each (F+1, n_d).

    Composite Clenshaw-Curtis on panels graded towards both ends, the points per
    panel doubled until successive results agree to settings.moments.rtol.
    """
    shape = (F + 1, n_d)
    if e <= b:
        return np.zeros(shape), np.zeros(shape), np.zeros(shape)
    breaks = _graded_breakpoints(b, e, F)
    rtol = settings.moments.rtol
    order = settings.moments.start_points - 1
    previous = None
    while True:
        rho, w = _composite_rule(breaks, order)
        cheb_values = cheb.chebvander((rho - mid) / half, n_d - 1)
        integrands = _segment_integrands(b, e, rho, F, k)
        current = [(f * w) @ cheb_values for f in integrands]
        scale = [(np.abs(f) * w) @ np.abs(cheb_values) for f in integrands]
        if previous is not None:
            diffs = [np.abs(c - p) for c, p in zip(current, previous)]
            bad = [d > rtol * s for d, s in zip(diffs, scale)]
            if not any(np.any(x) for x in bad):
                return tuple(current)
            logger.debug("moments refine segment={} points={}", index, order + 1)
            if 2 * order + 1 > settings.moments.max_points:
                family = next(i for i, x in enumerate(bad) if np.any(x))
                n, m = np.argwhere(bad[family])[0]
                raise QuadratureConvergenceError(
                    (index[0], index[1], int(n), int(m)), float(diffs[family][n, m]), order + 1
                )
        previous = current
        order *= 2


def precompute_moments(grid: RadialGrid, F: int, k: float, threads: Optional[int] = None) -> MomentTable:
    if k <= 0:
        raise InvalidArgumentError(f"wavenumber must be positive, got {k}")
    started = time.perf_counter()
    starts, ends = grid.segment_bounds()
    half = 0.5 * grid.width

    def interval(j: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        parts = [
            segment_moments(starts[j, s], ends[j, s], grid.midpoints[j], half, F, k, (j, s), grid.n_d)
            for s in range(grid.n_d + 1)
        ]
        return tuple(np.stack([p[f] for p in parts]) for f in range(3))

    results = parallel_map(interval, range(grid.n_i), threads)
    alpha, beta, gamma = (np.stack([r[f] for r in results]) for f in range(3))
    logger.info(
        "moments precomputed n_i={} n_d={} F={} k={} in {:.2f}s",
        grid.n_i, grid.n_d, F, k, time.perf_counter() - started,
    )
    return MomentTable(r_max=grid.r_max, n_i=grid.n_i, n_d=grid.n_d, F=F, k=k, alpha=alpha, beta=beta, gamma=gamma)


def sweep_tables(grid: RadialGrid, F: int, k: float) -> SweepTables:
    z = k * grid.nodes
    n = np.arange(F + 1)
    starts, ends = grid.segment_bounds()
    ratio_s = power_ratio(starts[..., None], ends[..., None], n + 1)
    ratio_q = power_ratio(starts[..., None], ends[..., None], n)
    return SweepTables(
        k=k,
        jt=np.moveaxis(jtilde_table(F, z), 0, -1),
        yt=np.moveaxis(ytilde_table(F, z), 0, -1),
        s=np.moveaxis(power_over_double_factorial(F, z, -1), 0, -1),
        ratio_s=ratio_s,
        ratio_q=ratio_q,
    )


def _mode_slice(n: Optional[int], F: int) -> slice:
    return slice(0, F + 1) if n is None else slice(n, n + 1)


def radial_sweep(
    grid: RadialGrid,
    moments: MomentTable,
    coeffs: np.ndarray,
    tables: SweepTables,
    n: Optional[int] = None,
) -> np.ndarray:
    """
    K at every node from the fit coefficients.

    coeffs is (n_i, n_d, F+1) for all modes and the result (n_i, n_d, F+1); with n
    given, coeffs is (n_i, n_d) and the result (n_i, n_d) for that mode only.
    """
    modes = _mode_slice(n, moments.F)
    c = coeffs if n is None else np.asarray(coeffs)[..., None]
    mu = np.einsum("jsnm,jmn->jsn", moments.alpha[:, :, modes], c)
    zeta = np.einsum("jsnm,jmn->jsn", moments.beta[:, :, modes], c)
    aleph = np.einsum("jsnm,jmn->n", moments.gamma[:, :, modes], c)

    segments = grid.n_i * (grid.n_d + 1)
    mu = mu.reshape(segments, -1)
    zeta = zeta.reshape(segments, -1)
    ratio_s = tables.ratio_s[:, :, modes].reshape(segments, -1)
    ratio_q = tables.ratio_q[:, :, modes].reshape(segments, -1)

    s_end = np.empty_like(mu)
    acc = np.zeros(mu.shape[1], dtype=mu.dtype)
    for seg in range(segments):
        acc = ratio_s[seg] * acc + mu[seg]
        s_end[seg] = acc
    q_start = np.empty_like(zeta)
    acc = np.zeros(zeta.shape[1], dtype=zeta.dtype)
    for seg in range(segments - 1, -1, -1):
        acc = zeta[seg] + ratio_q[seg] * acc
        q_start[seg] = acc

    shape = (grid.n_i, grid.n_d + 1, -1)
    s_node = s_end.reshape(shape)[:, : grid.n_d]
    q_node = q_start.reshape(shape)[:, 1:]
    jt, yt, s = tables.jt[..., modes], tables.yt[..., modes], tables.s[..., modes]
    k = tables.k
    kernel = 1j * (yt * s_node + jt * q_node) - k ** 3 * s * jt * aleph
    return kernel if n is None else kernel[..., 0]


def radial_sweep_direct(
    grid: RadialGrid, moments: MomentTable, coeffs: np.ndarray, tables: SweepTables
) -> np.ndarray:
    """
    Same kernel as radial_sweep, summing every segment contribution with explicit
    powers of the radius ratios instead of recurrences. O(nodes * segments).
    """
    n = np.arange(moments.F + 1)
    mu = np.einsum("jsnm,jmn->jsn", moments.alpha, coeffs).reshape(-1, moments.F + 1)
    zeta = np.einsum("jsnm,jmn->jsn", moments.beta, coeffs).reshape(-1, moments.F + 1)
    aleph = np.einsum("jsnm,jmn->n", moments.gamma, coeffs)
    starts, ends = (a.reshape(-1) for a in grid.segment_bounds())
    kernel = np.zeros((grid.n_i, grid.n_d, moments.F + 1), dtype=np.complex128)
    for j in range(grid.n_i):
        for i in range(grid.n_d):
            rho = grid.nodes[j, i]
            node_seg = j * (grid.n_d + 1) + i
            s_val = np.zeros(moments.F + 1, dtype=np.complex128)
            q_val = np.zeros(moments.F + 1, dtype=np.complex128)
            for seg in range(node_seg + 1):
                s_val += power_ratio(ends[seg], rho, n + 1) * mu[seg]
            for seg in range(node_seg + 1, ends.size):
                q_val += power_ratio(rho, starts[seg], n) * zeta[seg]
            kernel[j, i] = 1j * (tables.yt[j, i] * s_val + tables.jt[j, i] * q_val) - (
                tables.k ** 3 * tables.s[j, i] * tables.jt[j, i] * aleph
            )
    return kernel


class RadialKernelService:
    def __init__(self, cache_dir: Optional[str] = None, threads: Optional[int] = None) -> None:
        self.moment_cache_repository = MomentCacheRepository(cache_dir or settings.moments.cache_dir)
        self.threads = threads

    def get_moments(self, grid: RadialGrid, F: int, k: float) -> MomentTable:
        """
        Берёт таблицу моментов из кэша, иначе считает и сохраняет.
        """
        try:
            cached = self.moment_cache_repository.load(grid.r_max, grid.n_i, grid.n_d, F, k)
        except MomentCacheError as e:
            logger.warning("moment cache rejected: {}", e)
            cached = None
        if cached is not None:
            logger.info("moments loaded from cache n_i={} n_d={} F={} k={}", grid.n_i, grid.n_d, F, k)
            return cached
        table = precompute_moments(grid, F, k, self.threads)
        self.moment_cache_repository.save(table)
        return table
