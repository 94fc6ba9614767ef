from persistent.model.study import StudySpec
from services.study_service import StudyService


def run(spec: StudySpec, service: StudyService) -> int:
    rows, fit = service.run_flt_bench(spec)
    for row in rows:
        print(f"N={row.n} FLT={row.flt_error:.4e} FLT-QP={row.flt_qp_error:.4e} DLT={row.dlt_error:.4e} "
              f"IFLT={row.iflt_error:.4e} IFLT-QP={row.iflt_qp_error:.4e} IDLT={row.idlt_error:.4e} "
              f"t_flt={row.flt_seconds:.4e}s t_dlt={row.dlt_seconds:.4e}s")
    print(f"N log2(N)^2 fit {fit}")
    return 0
