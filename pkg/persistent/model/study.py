from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator

StudyKind = Literal["radial-convergence", "angular-convergence", "flt-accuracy", "flt-timing", "single-solve"]


class StudySpec(BaseModel):
    kind: StudyKind
    scatterer: str = "sphere"
    F: List[int] = Field(default_factory=lambda: [255])
    n_i: List[int] = Field(default_factory=lambda: [32])
    n_d: int = Field(default=4, ge=1)
    k: float = Field(default=1.0, gt=0)
    r_max: float = Field(default=4.0, gt=0)
    tol: float = Field(default=1e-10, gt=0)
    beta: float = 2.2
    sizes: List[int] = Field(default_factory=lambda: [256, 1024, 4096])
    reference_f: Optional[int] = Field(default=None, ge=1)
    table: Optional[str] = None
    out: Optional[str] = None
    command: Optional[str] = None

    @field_validator("F", "n_i", "sizes")
    @classmethod
    def non_empty(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("sweep list must not be empty")
        if any(v < 0 for v in value):
            raise ValueError("sweep values must be non-negative")
        return value


class ConvergenceRow(BaseModel):
    parameter: int
    error: Optional[float] = Field(default=None, ge=0)
    ratio: Optional[float] = None
    log2_ratio: Optional[float] = None
    seconds_per_iteration: Optional[float] = None
    iterations: Optional[int] = None
    tail_sup: Optional[float] = None
    tail_abs: Optional[float] = None
    tail_sup_log2: Optional[float] = None
    tail_abs_log2: Optional[float] = None
    failure: Optional[str] = None


class FltBenchRow(BaseModel):
    n: int
    dlt_error: float
    flt_error: float
    flt_qp_error: float
    idlt_error: float
    iflt_error: float
    iflt_qp_error: float
    dlt_seconds: float
    flt_seconds: float
    iflt_seconds: float
    flt_time_ratio: Optional[float] = None


class SolveSummary(BaseModel):
    scatterer: str
    iterations: int
    residual: float
    seconds_per_iteration: float
    setup_seconds: float
    error: Optional[float] = None
