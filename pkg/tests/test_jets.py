import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from cwpotts import jets
from cwpotts.jets import Jet

coord = st.floats(0.2, 2.0)


@given(coord, coord)
def test_exp_of_product(x0, y0):
    x, y = jets.variables([x0, y0], 3)
    f = jets.exp(x * y)
    e = math.exp(x0 * y0)
    assert_allclose(f.value, e, rtol=1e-14)
    assert_allclose(f.derivative((1, 1)), (1 + x0 * y0) * e, rtol=1e-12)
    assert_allclose(f.derivative((3, 0)), y0**3 * e, rtol=1e-12)
    assert_allclose(f.derivative((2, 1)), (2 * y0 + x0 * y0**2) * e, rtol=1e-12)


@given(coord, coord)
def test_log_and_quotient(x0, y0):
    x, y = jets.variables([x0, y0], 2)
    f = jets.log(1 + x * x * y)
    d = 1 + x0 * x0 * y0
    assert_allclose(f.derivative((1, 0)), 2 * x0 * y0 / d, rtol=1e-12)
    assert_allclose(f.derivative((0, 2)), -(x0**4) / d**2, rtol=1e-12)
    q = x / (1 + y)
    assert_allclose(q.derivative((1, 1)), -1 / (1 + y0) ** 2, rtol=1e-12)
    assert_allclose(q.derivative((0, 2)), 2 * x0 / (1 + y0) ** 3, rtol=1e-12)


@given(coord)
def test_sqrt_and_power(x0):
    (x,) = jets.variables([x0], 4)
    s = jets.sqrt(x)
    assert_allclose(s.derivative((3,)), 3 / 8 * x0**-2.5, rtol=1e-12)
    assert_allclose((x**3).derivative((3,)), 6.0, rtol=1e-12)
    assert_allclose((x**3).derivative((4,)), 0.0, atol=1e-12)


def test_gradient_and_hessian_lists():
    x, y = jets.variables([1.0, 2.0], 2)
    f = x * x * y + 3 * y
    assert_allclose(f.gradient(), [4.0, 4.0])
    assert_allclose(np.array(f.hessian(), dtype=float), [[4.0, 2.0], [2.0, 0.0]])


def test_numpy_operands_defer_to_jet():
    (x,) = jets.variables([0.5], 1)
    f = np.float64(2.0) * x
    assert isinstance(f, Jet)
    assert_allclose(f.derivative((1,)), 2.0)


def test_dispatch_on_plain_numbers():
    assert jets.exp(0.0) == 1.0
    assert jets.value(3.0) == 3.0


def test_order_is_bounded():
    with pytest.raises(ValueError):
        Jet(np.zeros(1), 1, jets.MAX_ORDER + 1)
