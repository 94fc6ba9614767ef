from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field

from persistent.model.base import ArrayModel
from persistent.model.flt import FltPlan
from persistent.model.radial import ModalField, MomentTable, RadialGrid, SweepTables


class SolverConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    F: int = Field(ge=0)
    n_i: int = Field(ge=1)
    n_d: int = Field(ge=1)
    k: float = Field(gt=0)
    r_max: float = Field(gt=0)
    tol: float = Field(gt=0)
    max_iters: int = Field(ge=1)
    restart: int = Field(ge=1)

    @computed_field
    @property
    def transform_size(self) -> int:
        size = 1
        while size < 3 * self.F + 1:
            size *= 2
        return max(size, 2)


class GmresResult(ArrayModel):
    solution: np.ndarray
    iterations: int
    residual: float
    history: List[float]


class SolveResult(ArrayModel):
    field: ModalField
    incident: ModalField
    iterations: int
    residual: float
    history: List[float]
    seconds_per_iteration: float
    setup_seconds: float


class OperatorContext(ArrayModel):
    """
    Everything apply_forward needs, sized for one SolverConfig and one scatterer.
    contrast_samples holds sum_l m_l P_l at the Chebyshev nodes of the product
    transform for every radial node, shaped (n_i, n_d, 2 * transform_size).
    """

    config: SolverConfig
    grid: RadialGrid
    moments: MomentTable
    tables: SweepTables
    plan: FltPlan
    contrast: np.ndarray
    contrast_samples: np.ndarray
    incident: ModalField
    threads: Optional[int] = None
