import numpy as np
import pytest
from numpy.polynomial import chebyshev as cheb

from utils.errors import InvalidArgumentError
from utils.fct import cheb_eval, fct, fct_direct, ifct, truncate
from utils.orthopoly import chebyshev_nodes


@pytest.mark.parametrize("n", [1, 2, 5, 16, 37])
def test_fct_matches_direct_sum(rng, n):
    samples = rng.standard_normal((3, n)) + 1j * rng.standard_normal((3, n))
    np.testing.assert_allclose(fct(samples), fct_direct(samples), atol=1e-13)


def test_fct_recovers_chebyshev_polynomial():
    x = chebyshev_nodes(8)
    coeffs = fct(4 * x ** 3 - 3 * x)
    expected = np.zeros(8)
    expected[3] = 1.0
    np.testing.assert_allclose(coeffs, expected, atol=1e-15)


def test_ifct_samples_series_at_more_nodes(rng):
    series = rng.standard_normal(6)
    x = chebyshev_nodes(20)
    np.testing.assert_allclose(ifct(series, 20), cheb.chebval(x, series), atol=1e-14)
    np.testing.assert_allclose(cheb_eval(series, x), cheb.chebval(x, series))


def test_ifct_inverts_fct(rng):
    samples = rng.standard_normal((2, 4, 12))
    np.testing.assert_allclose(ifct(fct(samples), 12), samples, atol=1e-14)


def test_ifct_of_empty_series_is_zero():
    values = ifct(np.zeros((3, 0)), 5)
    assert values.shape == (3, 5)
    assert not np.any(values)


def test_argument_checks():
    with pytest.raises(InvalidArgumentError):
        fct(np.zeros(0))
    with pytest.raises(InvalidArgumentError):
        ifct(np.ones(6), 4)
    with pytest.raises(InvalidArgumentError):
        truncate(np.ones(4), -1)


def test_truncate_copies_leading_coefficients():
    series = np.arange(6.0)
    head = truncate(series, 3)
    head[0] = 10.0
    np.testing.assert_array_equal(truncate(series, 3), [0.0, 1.0, 2.0])
    assert truncate(series, 10).size == 6


@pytest.mark.parametrize("n", [12, 1024, pytest.param(16384, marks=pytest.mark.slow)])
def test_round_trip_at_large_sizes(rng, n):
    samples = rng.uniform(-1.0, 1.0, (2, n))
    again = ifct(fct(samples), n)
    assert np.max(np.abs(again - samples)) <= 1e-12 * np.max(np.abs(samples))


def test_truncated_series_differs_by_dropped_tail(rng):
    series = rng.standard_normal(8)
    x = np.linspace(-1.0, 1.0, 33)
    tail = np.concatenate([np.zeros(4), series[4:]])
    np.testing.assert_allclose(cheb_eval(series, x) - cheb_eval(truncate(series, 4), x), cheb_eval(tail, x),
                               atol=1e-14)
    assert truncate(series, 0).size == 0
    np.testing.assert_array_equal(truncate(series, 8), series)


@pytest.mark.parametrize("m, n", [(16, 16), (32, 9), (64, 1)])
def test_analysis_then_truncation_matches_interpolant(rng, m, n):
    degree = m - 1
    series = rng.standard_normal(degree + 1)
    samples = cheb.chebval(chebyshev_nodes(m), series)
    np.testing.assert_allclose(truncate(fct(samples), n), series[:n], atol=1e-11)
