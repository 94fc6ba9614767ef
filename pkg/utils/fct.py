"""
Chebyshev analysis and synthesis at the nodes x_j = cos((2j+1)pi/(2N)).

A Chebyshev series is a plain array whose last axis holds the coefficients of
T_0, T_1, ...; every function here works along the last axis so whole blocks
of series are transformed in one call.
"""
import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.fft import dct

from utils.errors import InvalidArgumentError


def _real_transform(func, values: np.ndarray, *args) -> np.ndarray:
    if np.iscomplexobj(values):
        return func(values.real, *args) + 1j * func(values.imag, *args)
    return func(values, *args)


def _fct_real(samples: np.ndarray) -> np.ndarray:
    n = samples.shape[-1]
    coeffs = dct(samples, type=2, axis=-1) / n
    coeffs[..., 0] *= 0.5
    return coeffs


def fct(samples: np.ndarray) -> np.ndarray:
    """
    c_n = (eps_n / N) sum_j f_j cos(n(2j+1)pi/(2N)), eps_0 = 1, eps_n = 2.
    """
    samples = np.asarray(samples)
    if samples.shape[-1:] == (0,) or samples.ndim == 0:
        raise InvalidArgumentError("fct needs at least one sample")
    return _real_transform(_fct_real, samples)


def _ifct_real(series: np.ndarray, n: int) -> np.ndarray:
    padded = np.zeros(series.shape[:-1] + (n,))
    padded[..., : series.shape[-1]] = series
    padded[..., 1:] *= 0.5
    return dct(padded, type=3, axis=-1)


def ifct(series: np.ndarray, n: int) -> np.ndarray:
    """
    Values of sum_k b_k T_k at chebyshev_nodes(n).
    """
    series = np.asarray(series)
    if series.shape[-1] > n:
        raise InvalidArgumentError(f"series of length {series.shape[-1]} cannot be sampled at {n} nodes")
    if series.shape[-1] == 0:
        return np.zeros(series.shape[:-1] + (n,), dtype=series.dtype)
    return _real_transform(_ifct_real, series, n)


def truncate(series: np.ndarray, n: int) -> np.ndarray:
    if n < 0:
        raise InvalidArgumentError(f"truncation length must be non-negative, got {n}")
    return np.array(np.asarray(series)[..., :n])


def fct_direct(samples: np.ndarray) -> np.ndarray:
    """
    O(N^2) cosine sum, used as an oracle for fct.
    """
    samples = np.asarray(samples)
    n = samples.shape[-1]
    if n == 0:
        raise InvalidArgumentError("fct needs at least one sample")
    j = np.arange(n)
    basis = np.cos(np.outer(np.arange(n), 2 * j + 1) * np.pi / (2 * n))
    eps = np.full(n, 2.0)
    eps[0] = 1.0
    return (samples @ basis.T) * eps / n


def cheb_eval(series: np.ndarray, t: np.ndarray) -> np.ndarray:
    """
    Evaluates a single series at arbitrary points t in [-1, 1].
    """
    return cheb.chebval(np.asarray(t), np.asarray(series))
