import numpy as np

from persistent.model.base import ArrayModel


class MieSolution(ArrayModel):
    """
    Scaled Mie coefficients: interior a_n (rho/a)^n jt_n(n0 k rho) and exterior
    b_n [d_n (rho/a)^n jt_n(k rho) + i (a/rho)^(n+1) yt_n(k rho)], n = 0..n_max.
    """

    k: float
    radius: float
    index: float
    a_scaled: np.ndarray
    b_scaled: np.ndarray
    delta: np.ndarray
    residuals: np.ndarray

    @property
    def n_max(self) -> int:
        return self.a_scaled.size - 1
