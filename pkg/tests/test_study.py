import math

import numpy as np
import pandas as pd
import pytest

from persistent.model.radial import ModalField
from persistent.model.study import ConvergenceRow, StudySpec
from repository.study_result_repository import StudyResultRepository
from services.mie_service import field_error, sample_angles
from services.radial_kernel_service import build_grid
from services.study_service import (StudyService, command_line, fitted_order, nlog2n_fit, raster_path,
                                    spec_params, with_ratios)
from utils.errors import GmresConvergenceError, InvalidArgumentError


@pytest.fixture(scope="module")
def service() -> StudyService:
    return StudyService()


def test_with_ratios_leaves_first_row_empty():
    rows = with_ratios([
        ConvergenceRow(parameter=8, error=1e-4, tail_sup=1e-3, tail_abs=2e-3),
        ConvergenceRow(parameter=16, error=6.25e-6, tail_sup=1.25e-4, tail_abs=2.5e-4),
        ConvergenceRow(parameter=32, failure="did not converge"),
    ])
    assert rows[0].ratio is None and rows[0].log2_ratio is None
    assert rows[1].ratio == pytest.approx(16.0)
    assert rows[1].log2_ratio == pytest.approx(4.0)
    assert rows[1].tail_sup_log2 == pytest.approx(3.0)
    assert rows[1].tail_abs_log2 == pytest.approx(3.0)
    assert rows[2].ratio is None and rows[2].failure == "did not converge"


def test_fitted_order_recovers_power_law():
    parameters = [8, 16, 32, 64]
    errors = [3.0 * p ** -4.0 for p in parameters]
    assert fitted_order(parameters, errors) == pytest.approx(4.0)
    assert fitted_order(parameters, [None, None, 1e-3, None]) is None
    assert fitted_order([8, 16, 32], [1e-3, None, 1e-5]) == pytest.approx(math.log2(100.0) / 2)


def test_nlog2n_fit_of_exact_model():
    sizes = [256, 1024, 4096]
    seconds = [2e-9 * n * math.log2(n) ** 2 for n in sizes]
    fit = nlog2n_fit(sizes, seconds)
    assert fit["nlog2n_coefficient"] == pytest.approx(2e-9)
    assert fit["nlog2n_max_relative_deviation"] == pytest.approx(0.0, abs=1e-12)


def test_command_line_and_params_echo_the_study():
    spec = StudySpec(kind="radial-convergence", F=[31], n_i=[4, 8], k=1.5, reference_f=63, out="radial.csv")
    command = command_line(spec)
    assert command.startswith("python scatter_app.py --study radial-convergence")
    assert "--Ni 4,8" in command and "--k 1.5" in command and "--Fref 63" in command
    assert command.endswith("--out radial.csv")
    assert command_line(spec.model_copy(update={"command": "custom"})) == "custom"
    params = spec_params(spec, threads=3)
    assert params["n_i"] == "4,8" and params["tol"] == "1e-10" and params["threads"] == 3
    assert "out" not in params and "command" not in params
    assert spec_params(spec)["threads"] == 1
    assert raster_path("out/solve.csv") == "out/solve_raster.csv"


def test_sweep_lists_must_be_non_empty():
    with pytest.raises(ValueError):
        StudySpec(kind="radial-convergence", n_i=[])
    with pytest.raises(ValueError):
        StudySpec(kind="flt-accuracy", sizes=[-4])


def test_rows_round_trip_through_csv(tmp_path):
    repository = StudyResultRepository()
    rows = [
        ConvergenceRow(parameter=8, error=0.1 + 0.2, iterations=12),
        ConvergenceRow(parameter=16, error=1.0 / 3.0, iterations=9, ratio=0.9),
    ]
    path = tmp_path / "rows.csv"
    repository.write_rows(str(path), rows, {"k": 1.0, "F": "255"}, "python scatter_app.py --k 1.0", ["fitted_order=4.0"])
    command, params = repository.read_header(str(path))
    assert command == "python scatter_app.py --k 1.0"
    assert params == {"k": "1.0", "F": "255", "fitted_order": "4.0"}
    frame = repository.read_rows(str(path))
    assert list(frame.columns) == list(ConvergenceRow.model_fields)
    assert frame["error"].tolist() == [0.1 + 0.2, 1.0 / 3.0]
    assert frame["iterations"].tolist() == [12, 9]
    assert pd.isna(frame["ratio"][0])
    with pytest.raises(InvalidArgumentError):
        repository.write_rows(str(path), [], {})


def test_modal_file_round_trip_is_exact(tmp_path, rng):
    repository = StudyResultRepository()
    grid = build_grid(2.0, 3, 2)
    field = ModalField(values=rng.standard_normal((3, 2, 5)) + 1j * rng.standard_normal((3, 2, 5)))
    path = tmp_path / "modal.csv"
    repository.write_modal(str(path), grid, field, {"scatterer": "sphere"}, "python scatter_app.py")
    params, restored = repository.read_modal(str(path))
    assert params["n_i"] == "3" and params["F"] == "4" and float(params["r_max"]) == 2.0
    np.testing.assert_array_equal(restored.values, field.values)
    with pytest.raises(InvalidArgumentError):
        repository.write_modal(str(path), build_grid(2.0, 2, 2), field, {})


def test_flt_bench_reports_small_errors(service, tmp_path):
    out = tmp_path / "flt.csv"
    spec = StudySpec(kind="flt-accuracy", sizes=[64, 128], out=str(out))
    rows, fit = service.run_flt_bench(spec)
    assert [row.n for row in rows] == [64, 128]
    for row in rows:
        for error in (row.dlt_error, row.flt_error, row.flt_qp_error, row.idlt_error, row.iflt_error,
                      row.iflt_qp_error):
            assert error <= 1e-12
    assert rows[0].flt_time_ratio is None and rows[1].flt_time_ratio > 0
    assert fit["nlog2n_coefficient"] > 0
    command, params = service.result_repository.read_header(str(out))
    assert command.startswith("python scatter_app.py --study flt-accuracy")
    assert params["sizes"] == "64,128"
    with pytest.raises(InvalidArgumentError):
        service.run_flt_bench(StudySpec(kind="flt-accuracy", sizes=[100]))


def test_vacuum_radial_study_reproduces_plane_wave(service, tmp_path):
    out = tmp_path / "radial.csv"
    spec = StudySpec(kind="radial-convergence", scatterer="vacuum", F=[30], n_i=[2, 4], r_max=2.0, out=str(out))
    rows = service.run_radial_study(spec)
    assert [row.parameter for row in rows] == [2, 4]
    assert all(row.error <= 1e-12 and row.iterations == 0 for row in rows)
    assert rows[0].ratio is None
    frame = service.result_repository.read_rows(str(out))
    assert frame["parameter"].tolist() == [2, 4]


def test_radial_study_without_exact_field_uses_finest_grid(service):
    spec = StudySpec(kind="radial-convergence", scatterer="hollowed", F=[8], n_i=[2, 4, 8], n_d=3, r_max=2.0)
    rows = service.run_radial_study(spec)
    assert [row.parameter for row in rows] == [2, 4]
    assert rows[0].error > rows[1].error > 0
    assert rows[1].ratio == pytest.approx(rows[0].error / rows[1].error)


def test_radial_study_records_failed_solves(service, monkeypatch):
    solve = service.operator_service.solve_scattering

    def flaky(config, model):
        if config.n_i == 4:
            raise GmresConvergenceError(np.zeros(1), 0.5, 3, [1.0, 0.7, 0.5])
        return solve(config, model)

    monkeypatch.setattr(service.operator_service, "solve_scattering", flaky)
    spec = StudySpec(kind="radial-convergence", scatterer="vacuum", F=[10], n_i=[2, 4], r_max=2.0)
    rows = service.run_radial_study(spec)
    assert rows[0].error is not None and rows[0].failure is None
    assert rows[1].error is None and "GMRES" in rows[1].failure
    assert rows[1].ratio is None


def test_angular_study_needs_reference_above_sweep(service):
    spec = StudySpec(kind="angular-convergence", scatterer="hollowed", F=[8, 16], n_i=[2], r_max=2.0, reference_f=16)
    with pytest.raises(InvalidArgumentError):
        service.run_angular_study(spec)


def test_vacuum_angular_study_scores_against_plane_wave(service, tmp_path):
    out = tmp_path / "angular.csv"
    spec = StudySpec(kind="angular-convergence", scatterer="vacuum", F=[4, 8], n_i=[2], n_d=4, r_max=2.0,
                     reference_f=8, out=str(out))
    rows, order = service.run_angular_study(spec)
    assert rows[0].error > rows[1].error > 0
    assert all(row.tail_sup is None and row.tail_abs is None for row in rows)
    assert order is not None and order > 0
    _, params = service.result_repository.read_header(str(out))
    assert params["reference"] == "exact"


def test_self_referenced_angular_study_reports_tails(service, tmp_path):
    out = tmp_path / "angular.csv"
    spec = StudySpec(kind="angular-convergence", scatterer="hollowed", F=[4, 8], n_i=[2], n_d=3, r_max=2.0,
                     reference_f=16, out=str(out))
    rows, _ = service.run_angular_study(spec)
    assert all(row.failure is None for row in rows)
    for row in rows:
        assert 0 < row.tail_sup <= row.tail_abs
    assert rows[0].tail_abs > rows[1].tail_abs
    assert rows[1].tail_sup_log2 is not None
    _, params = service.result_repository.read_header(str(out))
    assert params["reference_F"] == "16"


def test_offset_angular_error_falls_against_exact_field(service):
    spec = StudySpec(kind="angular-convergence", scatterer="offset", F=[3, 7, 15], n_i=[16], n_d=4, r_max=4.0)
    rows, order = service.run_angular_study(spec)
    errors = [row.error for row in rows]
    assert all(error is not None for error in errors)
    assert errors[0] > errors[1] > errors[2]
    assert order > 1


def test_single_solve_writes_coefficients_and_raster(service, tmp_path):
    out = tmp_path / "solve.csv"
    spec = StudySpec(kind="single-solve", scatterer="vacuum", F=[30], n_i=[2], r_max=2.0, out=str(out))
    summary = service.run_single_solve(spec)
    assert summary.iterations == 0 and summary.error <= 1e-12
    raster = service.result_repository.read_rows(raster_path(str(out)))
    assert len(raster) == 2 * 4 * 37
    values = raster["re"].to_numpy() + 1j * raster["im"].to_numpy()
    expected = np.exp(1j * raster["rho"].to_numpy() * np.cos(raster["theta"].to_numpy()))
    np.testing.assert_allclose(values, expected, atol=1e-12)


def test_rescore_matches_reported_error(service, tmp_path):
    out = tmp_path / "sphere.csv"
    spec = StudySpec(kind="single-solve", scatterer="sphere", F=[16], n_i=[4], n_d=4, r_max=2.0, out=str(out))
    summary = service.run_single_solve(spec)
    assert summary.error is not None and summary.error < 1e-1
    assert service.rescore(str(out)) == pytest.approx(summary.error, rel=1e-12)


def test_sphere_error_falls_with_radial_refinement(service):
    spec = StudySpec(kind="radial-convergence", scatterer="sphere", F=[24], n_i=[8, 16], n_d=4, r_max=2.0)
    rows = service.run_radial_study(spec)
    assert rows[1].error <= 5e-3
    assert rows[1].ratio > 6


def test_sphere_field_error_uses_default_angles(service):
    grid = build_grid(2.0, 2, 2)
    assert len(sample_angles()) == 17
    zero = ModalField(values=np.zeros((2, 2, 1), dtype=np.complex128))
    assert field_error(zero, lambda rho, t: np.ones_like(rho, dtype=np.complex128), grid) == pytest.approx(1.0)


@pytest.mark.slow
def test_sphere_radial_order_is_four(service):
    spec = StudySpec(kind="radial-convergence", scatterer="sphere", F=[255], n_i=[8, 16, 32, 64], n_d=4)
    rows = service.run_radial_study(spec)
    ratios = [row.log2_ratio for row in rows[1:]]
    assert np.mean(ratios) == pytest.approx(4.0, abs=0.3)


@pytest.mark.slow
def test_hollowed_angular_order(service):
    spec = StudySpec(kind="angular-convergence", scatterer="hollowed", beta=2.2, F=[15, 31, 63], n_i=[16],
                     reference_f=255)
    rows, order = service.run_angular_study(spec)
    assert all(row.failure is None for row in rows)
    assert order == pytest.approx(4.3, abs=0.7)
