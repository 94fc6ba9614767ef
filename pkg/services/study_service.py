"""
Studies behind the result tables: radial and angular convergence sweeps, the
Legendre transform benchmark and a single documented solve.
"""
import math
import shlex
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from persistent.model.radial import RadialGrid
from persistent.model.scatterer import HomogeneousSphere, OffsetSphere, ScattererModel
from persistent.model.solver import SolveResult
from persistent.model.study import ConvergenceRow, FltBenchRow, SolveSummary, StudySpec
from repository.study_result_repository import StudyResultRepository
from services.flt_service import FltService, dlt, flt, idlt, idlt_unit_extended, iflt
from services.mie_service import MieReference, field_error, mie_solve, sample_angles
from services.operator_service import OperatorService, solver_config, synthesize
from services.radial_kernel_service import build_grid, interpolate_field
from settings.settings import settings
from utils.errors import (GmresConvergenceError, InvalidArgumentError, MieResonanceError,
                          QuadratureConvergenceError)
from utils.orthopoly import legendre_table

SOLVE_FAILURES = (GmresConvergenceError, QuadratureConvergenceError, MieResonanceError)

Reference = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _log2(value: Optional[float]) -> Optional[float]:
    return math.log2(value) if value is not None and value > 0 else None


def _ratio(previous: Optional[float], current: Optional[float]) -> Optional[float]:
    if previous is None or current is None or current <= 0 or previous <= 0:
        return None
    return previous / current


def with_ratios(rows: List[ConvergenceRow]) -> List[ConvergenceRow]:
    """
    Fills ratio columns from consecutive rows; the first row keeps them empty.
    """
    result = []
    for i, row in enumerate(rows):
        if i == 0:
            result.append(row)
            continue
        prev = rows[i - 1]
        ratio = _ratio(prev.error, row.error)
        update = {"ratio": ratio, "log2_ratio": _log2(ratio)}
        if row.tail_sup is not None:
            update["tail_sup_log2"] = _log2(_ratio(prev.tail_sup, row.tail_sup))
            update["tail_abs_log2"] = _log2(_ratio(prev.tail_abs, row.tail_abs))
        result.append(row.model_copy(update=update))
    return result


def fitted_order(parameters: Sequence[float], errors: Sequence[Optional[float]]) -> Optional[float]:
    """
    -slope of the least-squares line through (log2 parameter, log2 error).
    """
    points = [(math.log2(p), math.log2(e)) for p, e in zip(parameters, errors) if e is not None and e > 0 and p > 0]
    if len(points) < 2:
        return None
    x, y = np.array(points).T
    return float(-np.polyfit(x, y, 1)[0])


def command_line(spec: StudySpec) -> str:
    """
    Command that reruns the study, echoed at the top of every output file.
    """
    if spec.command:
        return spec.command
    parts = [
        "python scatter_app.py",
        f"--study {spec.kind}",
        f"--scatterer {spec.scatterer}",
        f"--F {','.join(map(str, spec.F))}",
        f"--Ni {','.join(map(str, spec.n_i))}",
        f"--Nd {spec.n_d}",
        f"--k {spec.k!r}",
        f"--rmax {spec.r_max!r}",
        f"--tol {spec.tol!r}",
        f"--beta {spec.beta!r}",
        f"--sizes {','.join(map(str, spec.sizes))}",
    ]
    if spec.reference_f is not None:
        parts.append(f"--Fref {spec.reference_f}")
    if spec.table:
        parts.append(f"--table {shlex.quote(spec.table)}")
    if spec.out:
        parts.append(f"--out {shlex.quote(spec.out)}")
    return " ".join(parts)


def spec_params(spec: StudySpec, threads: Optional[int] = None) -> Dict[str, str]:
    params = {}
    for key, value in spec.model_dump(exclude={"command", "out"}).items():
        if isinstance(value, list):
            value = ",".join(map(str, value))
        elif isinstance(value, float):
            value = repr(value)
        params[key] = value
    params["threads"] = threads or settings.runtime.threads
    return params


def raster_path(out: str) -> str:
    path = Path(out)
    return str(path.with_name(f"{path.stem}_raster{path.suffix or '.csv'}"))


class StudyService:
    def __init__(self, cache_dir: Optional[str] = None, threads: Optional[int] = None) -> None:
        self.operator_service = OperatorService(cache_dir, threads)
        self.threads = threads
        self.scatterer_service = self.operator_service.scatterer_service
        self.result_repository = StudyResultRepository()

    def build_scatterer(self, spec: StudySpec) -> ScattererModel:
        return self.scatterer_service.build(spec.scatterer, spec.beta, spec.table)

    def reference_for(self, model: ScattererModel, k: float, r_max: float) -> Optional[Reference]:
        """
        Точное решение, если оно известно для данного рассеивателя, иначе None.
        """
        if isinstance(model, HomogeneousSphere):
            if model.index == 1.0:
                return lambda rho, t: np.exp(1j * k * rho * t)
            return MieReference(mie_solve(k, radius=model.radius, index=model.index, r_max=r_max))
        if isinstance(model, OffsetSphere):
            solution = mie_solve(k, radius=model.radius, index=model.index, r_max=r_max + model.offset)
            return MieReference(solution, shift=model.offset)
        return None

    def _solve(self, spec: StudySpec, model: ScattererModel, F: int, n_i: int) -> Tuple[RadialGrid, SolveResult]:
        config = solver_config(F=F, n_i=n_i, n_d=spec.n_d, k=spec.k, r_max=spec.r_max, tol=spec.tol)
        result = self.operator_service.solve_scattering(config, model)
        return build_grid(config.r_max, config.n_i, config.n_d), result

    def _write(self, spec: StudySpec, rows, notes: Sequence[str] = ()) -> None:
        if spec.out:
            self.result_repository.write_rows(spec.out, rows, spec_params(spec, self.threads), command_line(spec), notes)

    def run_radial_study(self, spec: StudySpec) -> List[ConvergenceRow]:
        """
        Сходимость по числу радиальных интервалов при фиксированных F и n_d.
        Ошибка считается против точного решения, а если его нет, против самой мелкой сетки.
        """
        model = self.build_scatterer(spec)
        F = spec.F[0]
        reference = self.reference_for(model, spec.k, spec.r_max)
        solved: List[Tuple[int, Optional[RadialGrid], Optional[SolveResult], Optional[str]]] = []
        for n_i in spec.n_i:
            try:
                grid, result = self._solve(spec, model, F, n_i)
            except SOLVE_FAILURES as e:
                logger.warning("radial study n_i={} failed: {}", n_i, e)
                solved.append((n_i, None, None, str(e)))
                continue
            solved.append((n_i, grid, result, None))

        finest = None
        if reference is None:
            done = [s for s in solved if s[2] is not None]
            if done:
                finest = max(done, key=lambda s: s[0])
                logger.info("radial study self-reference n_i={}", finest[0])

        t = sample_angles()
        rows = []
        for n_i, grid, result, failure in solved:
            if failure is not None:
                rows.append(ConvergenceRow(parameter=n_i, failure=failure))
                continue
            if finest is not None and n_i == finest[0]:
                continue
            if reference is not None:
                error = field_error(result.field, reference, grid, t)
            else:
                ref_modes = interpolate_field(finest[1], finest[2].field, grid.flat_nodes)
                diff = result.field.values - ref_modes.reshape(result.field.shape)
                error = float(np.max(np.abs(synthesize(diff, t))))
            rows.append(
                ConvergenceRow(
                    parameter=n_i,
                    error=error,
                    seconds_per_iteration=result.seconds_per_iteration,
                    iterations=result.iterations,
                )
            )
            logger.info("radial study row n_i={} error={:.3e}", n_i, error)
        rows = with_ratios(rows)
        order = fitted_order([r.parameter for r in rows], [r.error for r in rows])
        self._write(spec, rows, [f"fitted_order={order!r}"])
        return rows

    def run_angular_study(self, spec: StudySpec) -> Tuple[List[ConvergenceRow], Optional[float]]:
        """
        Сходимость по числу мод F. Ошибка считается против точного решения, если оно есть,
        иначе против решения с F_ref модами на той же сетке.
        """
        model = self.build_scatterer(spec)
        n_i = spec.n_i[0]
        exact = self.reference_for(model, spec.k, spec.r_max)
        t = sample_angles()
        if exact is not None:
            reference_note = "reference=exact"
            ref_values = legendre = ref_synth = None
        else:
            reference_f = spec.reference_f or settings.study.angular_reference_f
            if max(spec.F) >= reference_f:
                raise InvalidArgumentError(f"swept F must stay below the reference F={reference_f}")
            reference_note = f"reference_F={reference_f}"
            _, reference = self._solve(spec, model, reference_f, n_i)
            ref_values = reference.field.values
            legendre = legendre_table(reference_f, t)
            ref_synth = np.tensordot(ref_values, legendre, axes=([-1], [0]))

        rows = []
        for F in spec.F:
            tails = {}
            if ref_values is not None:
                tail = np.tensordot(ref_values[..., F + 1:], legendre[F + 1:], axes=([-1], [0]))
                tails = {
                    "tail_sup": float(np.max(np.abs(tail))),
                    "tail_abs": float(np.max(np.sum(np.abs(ref_values[..., F + 1:]), axis=-1))),
                }
            try:
                grid, result = self._solve(spec, model, F, n_i)
            except SOLVE_FAILURES as e:
                logger.warning("angular study F={} failed: {}", F, e)
                rows.append(ConvergenceRow(parameter=F, failure=str(e), **tails))
                continue
            if exact is not None:
                error = field_error(result.field, exact, grid, t)
            else:
                approx = np.tensordot(result.field.values, legendre[: F + 1], axes=([-1], [0]))
                error = float(np.max(np.abs(approx - ref_synth)))
            rows.append(
                ConvergenceRow(
                    parameter=F,
                    error=error,
                    seconds_per_iteration=result.seconds_per_iteration,
                    iterations=result.iterations,
                    **tails,
                )
            )
            logger.info("angular study row F={} error={:.3e} {}", F, error, reference_note)
        rows = with_ratios(rows)
        order = fitted_order([r.parameter + 1 for r in rows], [r.error for r in rows])
        last = rows[-1].log2_ratio if rows else None
        self._write(spec, rows, [reference_note, f"fitted_order={order!r}", f"last_log2_ratio={last!r}"])
        return rows, order

    def run_flt_bench(self, spec: StudySpec) -> Tuple[List[FltBenchRow], Dict[str, float]]:
        """
        Errors of every transform against the extended-precision synthesis of P_{N/2}
        and best-of-repeats timings on a fixed random input.
        """
        repeats = 5 if spec.kind == "flt-timing" else 1
        plain, extended = FltService(False), FltService(True)
        rng = np.random.default_rng(0)
        rows: List[FltBenchRow] = []
        for n in spec.sizes:
            index = n // 2
            exact = idlt_unit_extended(n, index)
            unit = np.zeros(n)
            unit[index] = 1.0
            plan, plan_qp = plain.get_plan(n), extended.get_plan(n)
            samples = rng.standard_normal(2 * n)
            coeffs = rng.standard_normal(n)
            row = FltBenchRow(
                n=n,
                dlt_error=float(np.max(np.abs(dlt(exact) - unit))),
                flt_error=float(np.max(np.abs(flt(plan, exact) - unit))),
                flt_qp_error=float(np.max(np.abs(flt(plan_qp, exact) - unit))),
                idlt_error=float(np.max(np.abs(idlt(unit) - exact))),
                iflt_error=float(np.max(np.abs(iflt(plan, unit) - exact))),
                iflt_qp_error=float(np.max(np.abs(iflt(plan_qp, unit) - exact))),
                dlt_seconds=_best_time(lambda: dlt(samples), repeats),
                flt_seconds=_best_time(lambda: flt(plan, samples), repeats),
                iflt_seconds=_best_time(lambda: iflt(plan, coeffs), repeats),
            )
            if rows:
                row = row.model_copy(update={"flt_time_ratio": row.flt_seconds / rows[-1].flt_seconds})
            rows.append(row)
            logger.info("flt bench n={} flt_error={:.3e} flt_seconds={:.4f}", n, row.flt_error, row.flt_seconds)
        fit = nlog2n_fit([r.n for r in rows], [r.flt_seconds for r in rows])
        self._write(spec, rows, [f"{key}={value!r}" for key, value in fit.items()])
        return rows, fit

    def run_single_solve(self, spec: StudySpec) -> SolveSummary:
        """
        Одно решение: коэффициенты по узлам, поле на сетке (rho, theta) и сводка.
        """
        model = self.build_scatterer(spec)
        grid, result = self._solve(spec, model, spec.F[0], spec.n_i[0])
        reference = self.reference_for(model, spec.k, spec.r_max)
        error = field_error(result.field, reference, grid) if reference is not None else None
        if spec.out:
            params = spec_params(spec, self.threads)
            command = command_line(spec)
            self.result_repository.write_modal(spec.out, grid, result.field, params, command)
            theta = np.linspace(0.0, np.pi, 37)
            values = synthesize(result.field.values.reshape(grid.node_count, -1), np.cos(theta))
            self.result_repository.write_raster(raster_path(spec.out), grid.flat_nodes, theta, values, params, command)
        summary = SolveSummary(
            scatterer=spec.scatterer,
            iterations=result.iterations,
            residual=result.residual,
            seconds_per_iteration=result.seconds_per_iteration,
            setup_seconds=result.setup_seconds,
            error=error,
        )
        logger.info("single solve {}", summary.model_dump_json())
        return summary

    def rescore(self, path: str) -> Optional[float]:
        """
        Re-reads a written solution and scores it against the exact field.
        """
        params, field = self.result_repository.read_modal(path)
        k, r_max = float(params["k"]), float(params["r_max"])
        spec = StudySpec(kind="single-solve", scatterer=params["scatterer"], beta=float(params["beta"]),
                         table=_optional(params.get("table")), k=k, r_max=r_max)
        reference = self.reference_for(self.build_scatterer(spec), k, r_max)
        if reference is None:
            return None
        grid = build_grid(r_max, int(params["n_i"]), int(params["n_d"]))
        return field_error(field, reference, grid)


def _optional(value: Optional[str]) -> Optional[str]:
    return None if value in (None, "", "None") else value


def _best_time(fn: Callable[[], object], repeats: int) -> float:
    best = math.inf
    for _ in range(max(repeats, 1)):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def nlog2n_fit(sizes: Sequence[int], seconds: Sequence[float]) -> Dict[str, float]:
    """
    Least-squares t = c N log2(N)^2 and the largest relative deviation from it.
    """
    n = np.asarray(sizes, dtype=np.float64)
    t = np.asarray(seconds, dtype=np.float64)
    model = n * np.log2(n) ** 2
    c = float(np.dot(t, model) / np.dot(model, model))
    deviation = float(np.max(np.abs(t - c * model) / t)) if np.all(t > 0) else math.inf
    return {"nlog2n_coefficient": c, "nlog2n_max_relative_deviation": deviation}
