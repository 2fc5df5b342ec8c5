import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from fracmap.specfun import (
    DomainError,
    PoleError,
    binomial_real,
    falling_factorial,
    gamma,
    h_falling_factorial,
    kernel_U,
    kernel_values,
    log_gamma,
    zeta,
)

mpmath.mp.dps = 40


@pytest.mark.parametrize(
    "x, expected",
    [(1.0, 0.0), (5.0, 3.1780538303479458), (0.5, 0.5723649429247001)],
)
def test_log_gamma_examples(x, expected):
    assert log_gamma(x) == pytest.approx(expected, rel=1e-14, abs=1e-300)


def test_log_gamma_relative_accuracy():
    xs = np.concatenate([np.linspace(0.1, 50, 2001), 1 + np.linspace(-0.4, 0.4, 201), 2 + np.linspace(-0.4, 0.4, 201)])
    for x in xs:
        if x in (1.0, 2.0):
            continue
        ref = float(mpmath.loggamma(x))
        assert abs(log_gamma(x) - ref) <= 1e-14 * abs(ref), x


@pytest.mark.parametrize("x", [0.0, -1.0, -2.5])
def test_log_gamma_domain(x):
    with pytest.raises(DomainError):
        log_gamma(x)


@pytest.mark.parametrize(
    "x, expected",
    [(0.5, 1.7724538509055159), (-0.5, -3.5449077018110318), (4.0, 6.0)],
)
def test_gamma_examples(x, expected):
    assert gamma(x) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("x", [0.0, -1.0, -7.0])
def test_gamma_poles(x):
    with pytest.raises(PoleError):
        gamma(x)


@settings(max_examples=200)
@given(st.floats(-5, 5))
def test_gamma_recurrence(x):
    # stay clear of the poles and of the overflow next to x = 0
    assume(abs(x) > 1e-3 and (x > 0 or abs(x - round(x)) > 1e-3))
    assert gamma(x + 1) == pytest.approx(x * gamma(x), rel=1e-12)


@pytest.mark.parametrize("s, expected", [(2.0, math.pi**2 / 6), (4.0, math.pi**4 / 90)])
def test_zeta_closed_forms(s, expected):
    assert abs(zeta(s) - expected) <= 1e-13


def test_zeta_three_halves_against_direct_sum():
    n = 10**7
    partial = np.sum(np.arange(1, n + 1, dtype=float) ** -1.5)
    # Euler-Maclaurin remainder of the tail beyond n: integral minus half-term
    tail = 2.0 / math.sqrt(n) - 0.5 * n**-1.5
    assert abs(zeta(1.5) - (partial + tail)) <= 1e-10


def test_zeta_matches_mpmath_on_grid():
    for s in np.linspace(1.01, 30, 200):
        assert abs(zeta(s) - float(mpmath.zeta(s))) <= 1e-13


def test_zeta_decreasing():
    values = [zeta(s) for s in np.linspace(1.05, 12, 100)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_zeta_domain():
    with pytest.raises(DomainError):
        zeta(1.0)


def test_falling_factorial_examples():
    assert falling_factorial(3, 0) == 1.0
    alpha = 0.5
    assert falling_factorial(alpha - 1, alpha - 1) == pytest.approx(1.7724538509055159, rel=1e-14)
    t = 1e6
    assert abs(falling_factorial(t, 0.5) / t**0.5 - 1) <= 1e-6


def test_falling_factorial_negative_arguments():
    # Gamma(-0.3) / Gamma(1.2) by the reflection route
    assert falling_factorial(-1.3, -1.5) == pytest.approx(gamma(-0.3) / gamma(1.2), rel=1e-13)


def test_falling_factorial_pole():
    with pytest.raises(PoleError):
        falling_factorial(-2.0, 0.5)


def test_h_falling_factorial():
    assert h_falling_factorial(2, 1, 1) == pytest.approx(2.0)
    for t, a in [(3.7, 0.4), (0.2, -0.6), (10.0, 1.5)]:
        assert h_falling_factorial(t, a, 1.0) == falling_factorial(t, a)
    direct = 0.5**0.5 * gamma(3.0) / gamma(2.5)
    assert h_falling_factorial(1, 0.5, 0.5) == pytest.approx(direct, rel=1e-14)


def test_kernel_examples():
    assert kernel_U(0.5, 0) == 0.0
    assert kernel_U(0.5, -3) == 0.0
    assert kernel_U(0.5, 1) == pytest.approx(1.7724538509055159, rel=1e-14)
    assert kernel_U(1.0, 7) == pytest.approx(1.0, rel=1e-15)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
def test_kernel_power_law(alpha):
    n = 10**6
    assert abs(kernel_U(alpha, n) / n ** (alpha - 1) - 1) <= 1e-5


@pytest.mark.parametrize("alpha", [0.1, 0.37, 0.9, 1.0])
def test_kernel_recurrence_matches_gamma_ratio(alpha):
    values = kernel_values(alpha, 200)
    direct = np.array([kernel_U(alpha, n) for n in range(1, 201)])
    np.testing.assert_allclose(values, direct, rtol=1e-13)


def test_binomial_examples():
    assert binomial_real(0.5, 0) == 1.0
    assert binomial_real(0.5, 2) == pytest.approx(-0.125, rel=1e-15)
    g = 1 - 0.3
    assert binomial_real(g, 3) == pytest.approx(gamma(1.7) / (gamma(4.0) * gamma(-1.3)), rel=1e-13)


@given(st.floats(-4, 4), st.integers(1, 30))
def test_binomial_pascal(g, m):
    lhs = binomial_real(g, m)
    rhs = binomial_real(g - 1, m) + binomial_real(g - 1, m - 1)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("alpha", [0.1, 0.37, 0.9])
def test_kernel_against_mpmath(alpha):
    for n in [1, 2, 16, 169, 170, 171, 256, 10**4, 10**9]:
        ref = float(mpmath.gamma(n + alpha - 1) / mpmath.gamma(n))
        assert kernel_U(alpha, n) == pytest.approx(ref, rel=5e-15), n
