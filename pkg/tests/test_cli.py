import pytest

from presentations.cli_app import EXIT_OK, EXIT_SOLVE_FAILURE, EXIT_USAGE, int_list, parse_spec, run, spec_from_args
from repository.study_result_repository import StudyResultRepository
from scatter_app import main
from settings.settings import settings


def test_int_list_parses_sweeps():
    assert int_list("8,16, 32") == [8, 16, 32]
    assert int_list("7") == [7]


def test_defaults_come_from_settings():
    spec = spec_from_args(parse_spec([]))
    assert spec.kind == "single-solve" and spec.scatterer == "sphere"
    assert spec.F == [settings.solver.F] and spec.n_i == [settings.solver.n_i]
    assert spec.out == "single-solve.csv"


@pytest.mark.parametrize(
    "argv",
    [
        ["--scatterer", "ellipsoid"],
        ["--scatterer", "tabulated", "--F", "4", "--Ni", "2"],
        ["--F", "8,x"],
        ["--study", "flt-accuracy", "--sizes", "100"],
        ["--threads", "0"],
        ["--k", "-1"],
    ],
)
def test_usage_errors_exit_with_two(argv, tmp_path):
    assert run(argv + ["--out", str(tmp_path / "out.csv")]) == EXIT_USAGE


def test_flt_study_writes_rerunnable_csv(tmp_path, capsys):
    out = tmp_path / "flt.csv"
    assert main(["--study", "flt-accuracy", "--sizes", "64,128", "--out", str(out)]) == EXIT_OK
    assert "N=128" in capsys.readouterr().out
    command, params = StudyResultRepository().read_header(str(out))
    assert "--sizes 64,128" in command and params["kind"] == "flt-accuracy"


def test_rerun_repeats_the_written_study(tmp_path):
    out = tmp_path / "flt.csv"
    assert run(["--study", "flt-accuracy", "--sizes", "64", "--out", str(out)]) == EXIT_OK
    before = StudyResultRepository().read_rows(str(out))
    assert run(["--rerun", str(out)]) == EXIT_OK
    after = StudyResultRepository().read_rows(str(out))
    assert after["n"].tolist() == before["n"].tolist()
    assert after["flt_error"].tolist() == before["flt_error"].tolist()


def test_single_solve_prints_summary(tmp_path, capsys):
    out = tmp_path / "vacuum.csv"
    argv = ["--scatterer", "vacuum", "--F", "20", "--Ni", "2", "--rmax", "2", "--out", str(out)]
    assert run(argv) == EXIT_OK
    printed = capsys.readouterr().out
    assert printed.startswith("vacuum: iterations=0")
    assert out.exists() and out.with_name("vacuum_raster.csv").exists()


def test_unconverged_solve_exits_with_one(tmp_path, monkeypatch):
    monkeypatch.setattr(settings.solver, "max_iters", 1)
    argv = ["--scatterer", "sphere", "--F", "8", "--Ni", "2", "--Nd", "3", "--rmax", "2", "--tol", "1e-14",
            "--out", str(tmp_path / "sphere.csv")]
    assert run(argv) == EXIT_SOLVE_FAILURE


def test_rerun_of_missing_file_is_a_usage_error(tmp_path):
    assert run(["--rerun", str(tmp_path / "missing.csv")]) == EXIT_USAGE
