import numpy as np

from persistent.model.base import ArrayModel


class RecurrenceCoeffs(ArrayModel):
    """
    p_{k+1}(x) = (A_k x + B_k) p_k(x) + C_k p_{k-1}(x), indexed by k.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray


class AssociatedPolyTable(ArrayModel):
    """
    Chebyshev coefficients of Q_{l,m} and R_{l,m} for m = 0..m_max.

    Q[m] has length m + 1, R[m] has length max(m, 1).
    """

    l: int
    Q: list
    R: list


class QuadratureRule(ArrayModel):
    nodes: np.ndarray
    weights: np.ndarray
