import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from layerbem.specfun import (DIST_FLOOR, MAX_ORDER, OrderLimitError,
                              bessel_jy, fundamental_solution,
                              fundamental_solution_normal_derivative, hankel1)


def j0_series(x: float) -> float:
    """Independent power-series oracle for J_0."""
    total = 0.0
    term = 1.0
    n = 0
    while abs(term) >= 1e-18:
        total += term
        n += 1
        term *= -((x / 2.0) ** 2) / (n * n)
    return total


def test_j0_against_taylor_series_oracle():
    oracle = j0_series(2.0)
    assert bessel_jy(0, 2.0).j_value == pytest.approx(oracle, rel=1e-14)


def test_origin_values():
    c = bessel_jy(0, 0.0, include_y=False)
    assert c.j_value == 1.0
    assert c.jprime_value == 0.0
    assert bessel_jy(1, 0.0, include_y=False).j_value == 0.0


def test_y_singular_at_origin():
    with pytest.raises(ValueError):
        bessel_jy(0, 0.0)


def test_negative_argument_rejected():
    with pytest.raises(ValueError):
        bessel_jy(0, -1.0)


def test_order_cap():
    with pytest.raises(OrderLimitError):
        bessel_jy(MAX_ORDER + 1, 1.0)


def test_negative_order_rejected():
    with pytest.raises(ValueError):
        bessel_jy(-1, 1.0)


def test_y_overflow_reported():
    with pytest.raises(OverflowError):
        bessel_jy(180, 1e-8)


def hankel0_asymptotic(x: float) -> complex:
    """Large-argument oracle with three correction terms."""
    p = 1.0 - 9.0 / (128.0 * x**2)
    q = -1.0 / (8.0 * x) + 75.0 / (3072.0 * x**3)
    return math.sqrt(2.0 / (math.pi * x)) * np.exp(1j * (x - math.pi / 4)) * (p + 1j * q)


def test_hankel_matches_asymptotic_oracle():
    value, _ = hankel1(0, 100.0)
    oracle = hankel0_asymptotic(100.0)
    assert abs(value - oracle) / abs(oracle) < 1e-6


def test_hankel_imaginary_part_is_y():
    for m, x in [(0, 1.5), (3, 7.0), (11, 30.0)]:
        value, dvalue = hankel1(m, x)
        c = bessel_jy(m, x)
        assert value.imag == c.y_value
        assert value.real == c.j_value
        assert dvalue == complex(c.jprime_value, c.yprime_value)


def test_hankel_derivative_identity():
    # H_0' = -H_1
    _, d0 = hankel1(0, 3.7)
    h1, _ = hankel1(1, 3.7)
    assert abs(d0 + h1) < 1e-12


@settings(max_examples=60, deadline=None)
@given(order=st.integers(0, 80), x=st.floats(0.1, 200.0))
def test_wronskian_identity(order, x):
    c = bessel_jy(order, x)
    wronskian = c.j_value * c.yprime_value - c.jprime_value * c.y_value
    assert wronskian == pytest.approx(2.0 / (math.pi * x), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(order=st.integers(1, 40), x=st.floats(1.0, 60.0))
def test_recurrence_consistency(order, x):
    for getter in (lambda c: c.j_value, lambda c: c.y_value):
        lo = getter(bessel_jy(order - 1, x))
        mid = getter(bessel_jy(order, x))
        hi = getter(bessel_jy(order + 1, x))
        lhs = lo + hi
        rhs = 2.0 * order / x * mid
        if abs(rhs) > 1e-8:
            assert lhs == pytest.approx(rhs, rel=1e-10)


def test_bessel_ode_residual():
    # x^2 H'' + x H' + (x^2 - m^2) H = 0, second derivative by FD of H'
    h = 1e-5
    for m, x in [(0, 5.0), (4, 12.0)]:
        _, dp = hankel1(m, x + h)
        _, dm = hankel1(m, x - h)
        value, dvalue = hankel1(m, x)
        d2 = (dp - dm) / (2 * h)
        residual = x * x * d2 + x * dvalue + (x * x - m * m) * value
        assert abs(residual) / abs(value) < 1e-6


def test_purity():
    assert bessel_jy(7, 13.0) == bessel_jy(7, 13.0)
    assert hankel1(3, 2.5) == hankel1(3, 2.5)


def test_fundamental_solution_value():
    h0, _ = hankel1(0, 1.0)
    phi = fundamental_solution(1.0, (1.0, 0.0), (0.0, 0.0))
    assert phi == pytest.approx(0.25j * h0)


def test_fundamental_solution_symmetry():
    x, y = (0.3, 1.2), (-0.7, 0.4)
    assert fundamental_solution(2.0, x, y) == fundamental_solution(2.0, y, x)


def test_fundamental_solution_singularity_floor():
    with pytest.raises(ValueError):
        fundamental_solution(1.0, (0.0, 0.0), (0.0, DIST_FLOOR / 10))


def test_fundamental_solution_satisfies_helmholtz():
    k, h = 1.3, 1e-3
    y = np.array([0.0, 0.0])
    x0 = np.array([2.0, 0.0])

    def phi(x):
        return fundamental_solution(k, x, y)

    lap = (
        phi(x0 + [h, 0]) + phi(x0 - [h, 0]) + phi(x0 + [0, h]) + phi(x0 - [0, h])
        - 4 * phi(x0)
    ) / h**2
    assert abs(lap + k * k * phi(x0)) < 1e-5


def test_normal_derivative_orthogonal_vanishes():
    x, y = np.array([1.0, 0.0]), np.array([0.0, 0.0])
    assert fundamental_solution_normal_derivative(2.0, x, y, (0.0, 1.0)) == 0.0


def test_normal_derivative_matches_fd_oracle():
    k, h = 2.0, 1e-5
    x = np.array([0.6, 0.8])
    y = np.array([0.0, 0.0])
    n = np.array([math.cos(0.3), math.sin(0.3)])
    fd = (
        fundamental_solution(k, x, y + h * n)
        - fundamental_solution(k, x, y - h * n)
    ) / (2 * h)
    exact = fundamental_solution_normal_derivative(k, x, y, n)
    assert abs(exact - fd) < 1e-7


def test_normal_derivative_sign_flip():
    x, y, n = (1.0, 0.5), (0.2, -0.3), (0.6, 0.8)
    plus = fundamental_solution_normal_derivative(1.7, x, y, n)
    minus = fundamental_solution_normal_derivative(1.7, x, y, (-0.6, -0.8))
    assert plus == -minus
