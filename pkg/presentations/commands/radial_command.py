from persistent.model.study import StudySpec
from services.study_service import StudyService


def run(spec: StudySpec, service: StudyService) -> int:
    rows = service.run_radial_study(spec)
    for row in rows:
        if row.failure:
            print(f"N_i={row.parameter} failed: {row.failure}")
        else:
            print(f"N_i={row.parameter} error={row.error:.6e} log2_ratio={row.log2_ratio} "
                  f"iterations={row.iterations} seconds_per_iteration={row.seconds_per_iteration:.4f}")
    return 0 if any(row.failure is None for row in rows) else 1
