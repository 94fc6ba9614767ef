import time
from collections import OrderedDict
from typing import Any, Optional

import numpy as np
from loguru import logger

from infrastructure.parallel.executor import chunk_slices, parallel_map
from persistent.model.flt import FltPlan
from persistent.model.radial import ModalField, MomentTable, RadialGrid
from persistent.model.scatterer import ScattererModel
from persistent.model.solver import OperatorContext, SolveResult, SolverConfig
from services.flt_service import FltService, flt, iflt
from services.gmres_service import gmres_solve
from services.radial_kernel_service import RadialKernelService, build_grid, fit_radial, radial_sweep, sweep_tables
from services.scatterer_service import ScattererService, incident_coeffs, incident_shift, support_radius
from settings.settings import settings
from utils.errors import InvalidArgumentError
from utils.orthopoly import legendre_table


def solver_config(**overrides: Any) -> SolverConfig:
    """
    settings.solver with per-call overrides; None values are ignored.
    """
    base = settings.solver.model_copy(update={k: v for k, v in overrides.items() if v is not None})
    return SolverConfig(**base.model_dump())


def _pad(values: np.ndarray, length: int) -> np.ndarray:
    padded = np.zeros(values.shape[:-1] + (length,), dtype=np.complex128)
    padded[..., : values.shape[-1]] = values
    return padded


def angular_integrate(plan: FltPlan, u: np.ndarray, m_samples: np.ndarray) -> np.ndarray:
    """
    I_n = int_{-1}^{1} P_n(t) u(t) m(t) dt for n < u.shape[-1], where u is given by its
    Legendre coefficients and m by its samples at the plan's nodes. Batched over
    leading axes.
    """
    u = np.asarray(u)
    if u.shape[-1] > plan.n or m_samples.shape[-1] != plan.points:
        raise InvalidArgumentError(
            f"transform of size {plan.n} cannot take {u.shape[-1]} modes and {m_samples.shape[-1]} samples"
        )
    coeffs = flt(plan, iflt(plan, _pad(u, plan.n)) * m_samples)
    n = np.arange(u.shape[-1])
    return coeffs[..., : u.shape[-1]] * 2.0 / (2 * n + 1)


def angular_stage(ctx: OperatorContext, values: np.ndarray) -> np.ndarray:
    flat = values.reshape(-1, values.shape[-1])
    samples = ctx.contrast_samples.reshape(-1, ctx.contrast_samples.shape[-1])
    parts = parallel_map(
        lambda s: angular_integrate(ctx.plan, flat[s], samples[s]),
        chunk_slices(flat.shape[0], ctx.threads),
        ctx.threads,
    )
    return np.concatenate(parts).reshape(values.shape)


def apply_kernel(ctx: OperatorContext, v: ModalField) -> ModalField:
    """
    K v: angular products per node, Chebyshev fit per interval, radial sweep per mode.
    """
    if v.shape != (ctx.grid.n_i, ctx.grid.n_d, ctx.config.F + 1):
        raise InvalidArgumentError(f"field of shape {v.shape} does not match the operator")
    densities = angular_stage(ctx, v.values)
    coeffs = fit_radial(ctx.grid, densities)
    return ModalField(values=radial_sweep(ctx.grid, ctx.moments, coeffs, ctx.tables))


def apply_forward(ctx: OperatorContext, v: ModalField) -> ModalField:
    """
    (I - (i/2) K) v, so the total field solves apply_forward(u) = u^i.
    """
    return ModalField(values=v.values - 0.5j * apply_kernel(ctx, v).values)


def synthesize(values: np.ndarray, t: np.ndarray) -> np.ndarray:
    """
    sum_n values[..., n] P_n(t) for every t, shape values.shape[:-1] + t.shape.
    """
    t = np.asarray(t, dtype=np.float64)
    table = legendre_table(values.shape[-1] - 1, t)
    return np.tensordot(values, table, axes=([-1], [0]))


class OperatorService:
    def __init__(self, cache_dir: Optional[str] = None, threads: Optional[int] = None) -> None:
        self.threads = threads
        self.flt_service = FltService()
        self.radial_kernel_service = RadialKernelService(cache_dir, threads)
        self.scatterer_service = ScattererService()
        self._moments: "OrderedDict[tuple, MomentTable]" = OrderedDict()

    def _get_moments(self, grid: RadialGrid, config: SolverConfig) -> MomentTable:
        """
        Keeps the settings.moments.memory_tables most recently used tables in memory.
        """
        key = (config.r_max, config.n_i, config.n_d, config.F, config.k)
        if key in self._moments:
            self._moments.move_to_end(key)
            return self._moments[key]
        table = self.radial_kernel_service.get_moments(grid, config.F, config.k)
        self._moments[key] = table
        while len(self._moments) > max(settings.moments.memory_tables, 1):
            evicted, _ = self._moments.popitem(last=False)
            logger.debug("moment table evicted from memory key={}", evicted)
        return table

    def build_context(self, config: SolverConfig, scatterer: ScattererModel) -> OperatorContext:
        """
        Готовит сетку, моменты, план FLT и коэффициенты рассеивателя для одного решения.
        """
        support = support_radius(scatterer)
        if support > config.r_max * (1 + 1e-12):
            raise InvalidArgumentError(f"scatterer reaches rho={support}, beyond r_max={config.r_max}")
        grid = build_grid(config.r_max, config.n_i, config.n_d)
        moments = self._get_moments(grid, config)
        plan = self.flt_service.get_plan(config.transform_size)
        contrast = self.scatterer_service.node_coeffs(scatterer, grid.nodes, 2 * config.F)
        contrast_samples = iflt(plan, _pad(contrast, plan.n))
        incident = incident_coeffs(config.k, grid.nodes, config.F, incident_shift(scatterer))
        return OperatorContext(
            config=config,
            grid=grid,
            moments=moments,
            tables=sweep_tables(grid, config.F, config.k),
            plan=plan,
            contrast=contrast,
            contrast_samples=contrast_samples,
            incident=ModalField(values=np.moveaxis(incident, 0, -1).astype(np.complex128)),
            threads=self.threads,
        )

    def solve(self, ctx: OperatorContext) -> SolveResult:
        """
        Решает (I - (i/2) K) u = u^i методом GMRES, стартуя с u = u^i.
        """
        shape = ctx.incident.shape
        timing = {"calls": 0, "seconds": 0.0}

        def apply(vector: np.ndarray) -> np.ndarray:
            started = time.perf_counter()
            result = apply_forward(ctx, ModalField.from_flat(vector, shape)).flat()
            timing["calls"] += 1
            timing["seconds"] += time.perf_counter() - started
            return result

        cfg = ctx.config
        result = gmres_solve(apply, ctx.incident.flat(), cfg.tol, cfg.max_iters, cfg.restart, x0=ctx.incident.flat())
        per_iteration = timing["seconds"] / max(timing["calls"], 1)
        logger.info(
            "solve finished iterations={} residual={:.3e} seconds_per_iteration={:.4f}",
            result.iterations, result.residual, per_iteration,
        )
        return SolveResult(
            field=ModalField.from_flat(result.solution, shape),
            incident=ctx.incident,
            iterations=result.iterations,
            residual=result.residual,
            history=result.history,
            seconds_per_iteration=per_iteration,
            setup_seconds=0.0,
        )

    def solve_scattering(self, config: SolverConfig, scatterer: ScattererModel) -> SolveResult:
        started = time.perf_counter()
        ctx = self.build_context(config, scatterer)
        setup = time.perf_counter() - started
        result = self.solve(ctx)
        return result.model_copy(update={"setup_seconds": setup})
