from typing import Tuple

import numpy as np

from persistent.model.base import ArrayModel


class RadialGrid(ArrayModel):
    """
    Равные интервалы на [0, r_max], в каждом n_d чебышёвских узлов по возрастанию.
    """

    r_max: float
    n_i: int
    n_d: int
    edges: np.ndarray
    nodes: np.ndarray

    @property
    def width(self) -> float:
        return self.r_max / self.n_i

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def node_count(self) -> int:
        return self.n_i * self.n_d

    @property
    def flat_nodes(self) -> np.ndarray:
        return self.nodes.reshape(-1)

    def segment_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Start and end of the n_d + 1 sub-node segments of every interval,
        each of shape (n_i, n_d + 1).
        """
        start = np.concatenate([self.edges[:-1, None], self.nodes], axis=1)
        end = np.concatenate([self.nodes, self.edges[1:, None]], axis=1)
        return start, end


class ModalField(ArrayModel):
    """
    Legendre coefficients v_n at every radial node, values shaped (n_i, n_d, F + 1).
    """

    values: np.ndarray

    @property
    def F(self) -> int:
        return self.values.shape[-1] - 1

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    @classmethod
    def from_flat(cls, vector: np.ndarray, shape: Tuple[int, ...]) -> "ModalField":
        return cls(values=np.asarray(vector, dtype=np.complex128).reshape(shape))

    @classmethod
    def zeros(cls, n_i: int, n_d: int, F: int) -> "ModalField":
        return cls(values=np.zeros((n_i, n_d, F + 1), dtype=np.complex128))

    def __add__(self, other: "ModalField") -> "ModalField":
        return ModalField(values=self.values + other.values)

    def __sub__(self, other: "ModalField") -> "ModalField":
        return ModalField(values=self.values - other.values)

    def __mul__(self, scalar: complex) -> "ModalField":
        return ModalField(values=self.values * scalar)

    __rmul__ = __mul__

    def inner(self, other: "ModalField") -> complex:
        return complex(np.vdot(self.values, other.values))

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


class MomentTable(ArrayModel):
    """
    alpha, beta, gamma with shape (n_i, n_d + 1, F + 1, n_d), indexed by
    (interval, segment, mode, Chebyshev degree).
    """

    r_max: float
    n_i: int
    n_d: int
    F: int
    k: float
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray


class SweepTables(ArrayModel):
    """
    Node values jt_n(k rho), yt_n(k rho), s_n(k rho) = (k rho)^n/(2n-1)!! shaped
    (n_i, n_d, F + 1), and per-segment ratios (b/e)^(n+1), (b/e)^n shaped
    (n_i, n_d + 1, F + 1).
    """

    k: float
    jt: np.ndarray
    yt: np.ndarray
    s: np.ndarray
    ratio_s: np.ndarray
    ratio_q: np.ndarray
