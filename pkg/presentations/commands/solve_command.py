from persistent.model.study import StudySpec
from services.study_service import StudyService


def run(spec: StudySpec, service: StudyService) -> int:
    summary = service.run_single_solve(spec)
    error = "n/a" if summary.error is None else f"{summary.error:.6e}"
    print(f"{summary.scatterer}: iterations={summary.iterations} residual={summary.residual:.3e} "
          f"seconds_per_iteration={summary.seconds_per_iteration:.4f} setup={summary.setup_seconds:.2f}s "
          f"error={error}")
    return 0
