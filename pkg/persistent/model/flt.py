from typing import List

import numpy as np

from persistent.model.base import ArrayModel


class FltLevel(ArrayModel):
    """
    One halving step of the cascade at block size S: values of Q_{l,K}, R_{l,K},
    Q_{l,K-1}, R_{l,K-1} (K = S/2) at chebyshev_nodes(S) for l = 1 + S*j,
    every array shaped (M/S, S).
    """

    size: int
    q_k: np.ndarray
    r_k: np.ndarray
    q_km1: np.ndarray
    r_km1: np.ndarray


class FltPlan(ArrayModel):
    """
    Transform of size n on m = 2n Chebyshev samples.
    """

    n: int
    extended_precision: bool
    nodes: np.ndarray
    weights: np.ndarray
    levels: List[FltLevel]

    @property
    def points(self) -> int:
        return 2 * self.n
