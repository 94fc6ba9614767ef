from persistent.model.study import StudySpec
from services.study_service import StudyService


def _fmt(value) -> str:
    return "n/a" if value is None else f"{value:.6e}"


def run(spec: StudySpec, service: StudyService) -> int:
    rows, order = service.run_angular_study(spec)
    for row in rows:
        if row.failure:
            print(f"F={row.parameter} failed: {row.failure}")
        else:
            print(f"F={row.parameter} error={row.error:.6e} log2_ratio={row.log2_ratio} "
                  f"tail_sup={_fmt(row.tail_sup)} tail_abs={_fmt(row.tail_abs)}")
    print(f"fitted order {order}")
    return 0 if any(row.failure is None for row in rows) else 1
