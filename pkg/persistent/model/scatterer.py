from typing import Literal, Union

import numpy as np
from pydantic import BaseModel, Field

from persistent.model.base import ArrayModel


class HomogeneousSphere(BaseModel):
    kind: Literal["sphere"] = "sphere"
    radius: float = Field(default=1.0, gt=0)
    index: float = 2.0


class OffsetSphere(BaseModel):
    """
    Sphere of the given radius centred at distance offset on the positive z axis.
    """

    kind: Literal["offset"] = "offset"
    offset: float = Field(default=2.0, gt=0)
    radius: float = Field(default=1.0, gt=0)
    index: float = 2.0


class HollowedSphere(BaseModel):
    """
    Shell 1 <= rho <= 2 with contrast m = -|cos theta|^beta.
    """

    kind: Literal["hollowed"] = "hollowed"
    beta: float = Field(default=2.2, gt=-1)
    inner: float = 1.0
    outer: float = 2.0


class TabulatedScatterer(ArrayModel):
    """
    Coefficients m_l sampled at increasing radii, coeffs shaped (len(radii), l_max + 1).
    """

    kind: Literal["tabulated"] = "tabulated"
    radii: np.ndarray
    coeffs: np.ndarray


ScattererModel = Union[HomogeneousSphere, OffsetSphere, HollowedSphere, TabulatedScatterer]
