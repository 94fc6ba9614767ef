import mpmath
import numpy as np

from utils import ddouble
from utils.orthopoly import chebyshev_nodes


def test_two_sum_and_two_prod_are_exact():
    a, b = np.float64(1.0), np.float64(1e-17)
    s, e = ddouble.two_sum(a, b)
    assert s == 1.0 and e == 1e-17
    p, e = ddouble.two_prod(np.float64(1.0 + 2 ** -30), np.float64(1.0 + 2 ** -30))
    assert p == 1.0 + 2 ** -29
    assert e == 2 ** -60


def test_ratio_carries_extra_digits():
    hi, lo = ddouble.dd_ratio(np.float64(1.0), np.float64(3.0))
    with mpmath.workdps(40):
        residual = mpmath.mpf(hi) + mpmath.mpf(lo) - mpmath.mpf(1) / 3
        assert abs(residual) < mpmath.mpf(2) ** -100


def test_add_and_mul_round_to_float():
    x = ddouble.dd_ratio(np.float64(2.0), np.float64(7.0))
    y = ddouble.dd_ratio(np.float64(5.0), np.float64(7.0))
    assert ddouble.dd_to_float(ddouble.dd_add(x, y)) == 1.0
    product = ddouble.dd_mul(ddouble.dd_ratio(np.float64(1.0), np.float64(3.0)), ddouble.dd_const(np.float64(3.0)))
    assert ddouble.dd_to_float(product) == 1.0


def test_chebyshev_nodes_dd():
    hi, lo = ddouble.chebyshev_nodes_dd(16)
    np.testing.assert_allclose(hi, chebyshev_nodes(16), atol=2e-16)
    assert np.all(np.abs(lo) <= np.spacing(np.abs(hi)) + 1e-300)
    assert not hi.flags.writeable
