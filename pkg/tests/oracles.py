"""
Brute-force reference computations shared by the tests.
"""
import math

import numpy as np
from numpy.polynomial import chebyshev as cheb
from numpy.polynomial.legendre import leggauss
from scipy.special import spherical_jn, spherical_yn


def double_factorial(m: int) -> float:
    """
    m!! with (-1)!! = 0!! = 1.
    """
    return float(math.prod(range(m, 0, -2))) if m > 0 else 1.0


def jtilde(n: int, z):
    return double_factorial(2 * n + 1) * spherical_jn(n, z) / np.asarray(z, dtype=np.float64) ** n


def ytilde(n: int, z):
    z = np.asarray(z, dtype=np.float64)
    return -z ** (n + 1) * spherical_yn(n, z) / double_factorial(2 * n - 1)


def kernel_brute_force(grid, density: np.ndarray, k: float, points: int = 40) -> np.ndarray:
    """
    K I(r) = -k^3 (2n+1) int_0^R j_n(k min(r, p)) h_n(k max(r, p)) I(p) p^2 dp for the
    Chebyshev interpolant of the nodal density on every interval, by Gauss-Legendre
    quadrature on pieces split at the target radius.
    """
    n_i, n_d, modes = density.shape
    n = np.arange(modes)[:, None]
    x, w = leggauss(points)
    fits = []
    for j in range(n_i):
        mid = grid.midpoints[j]
        half = 0.5 * grid.width
        fits.append(cheb.chebfit((grid.nodes[j] - mid) / half, density[j], n_d - 1))
    result = np.zeros(density.shape, dtype=np.complex128)
    for j0 in range(n_i):
        for i0 in range(n_d):
            r = grid.nodes[j0, i0]
            total = np.zeros(modes, dtype=np.complex128)
            for j in range(n_i):
                a, b = grid.edges[j], grid.edges[j + 1]
                pieces = [(a, r), (r, b)] if a < r < b else [(a, b)]
                for lo, hi in pieces:
                    p = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x
                    weights = 0.5 * (hi - lo) * w
                    values = cheb.chebval((p - grid.midpoints[j]) / (0.5 * grid.width), fits[j])
                    small = np.minimum(p, r)[None, :]
                    large = np.maximum(p, r)[None, :]
                    green = spherical_jn(n, k * small) * (spherical_jn(n, k * large) + 1j * spherical_yn(n, k * large))
                    total += np.sum(green * values * p * p * weights, axis=1)
            result[j0, i0] = -k ** 3 * (2 * np.arange(modes) + 1) * total
    return result
