"""Special functions against mpmath and exact rational arithmetic."""

import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqovs import specfun
from pqovs.errors import InvalidArgumentError

mp.mp.dps = 40


def mp_j(n, x):
    return float(mp.besselj(n, x))


def mp_ive(n, x):
    return float(mp.besseli(n, x) * mp.exp(-x))


@pytest.mark.parametrize("n", [0, 1, 2, 5, 13, 40, 120, 200])
@pytest.mark.parametrize("x", [1e-3, 0.5, 1.9, 2.1, 7.3, 29.9, 30.1, 64.0, 150.5, 420.0])
def test_bessel_j_matches_mpmath(n, x):
    assert abs(specfun.bessel_j(n, x) - mp_j(n, x)) < 1e-13


@pytest.mark.parametrize("n", [0, 1, 2, 5, 13, 40, 120, 200])
@pytest.mark.parametrize("x", [1e-3, 0.5, 1.9, 2.1, 7.3, 49.9, 50.1, 225.0, 450.0, 1000.0])
def test_bessel_i_scaled_matches_mpmath(n, x):
    ref = mp_ive(n, x)
    assert specfun.bessel_i_scaled(n, x) == pytest.approx(ref, rel=1e-12, abs=1e-300)


def test_trivial_values():
    assert specfun.bessel_j(0, 0.0) == 1.0
    assert specfun.bessel_j(3, 0.0) == 0.0
    assert specfun.bessel_i_scaled(0, 0.0) == 1.0
    assert specfun.bessel_i_scaled(4, 0.0) == 0.0
    assert specfun.laguerre(0, 2.5) == 1.0
    assert specfun.laguerre(1, 2.5) == pytest.approx(-1.5)
    assert specfun.log_factorial(0) == 0.0
    assert specfun.log_factorial(1) == 0.0


def test_first_zero_of_j0():
    # bisection on the mpmath series, independent of any tabulated value
    lo, hi = mp.mpf(2), mp.mpf(3)
    for _ in range(120):
        mid = (lo + hi) / 2
        if mp.nsum(lambda k: (-1) ** k * (mid / 2) ** (2 * k) / mp.factorial(k) ** 2, [0, mp.inf]) > 0:
            lo = mid
        else:
            hi = mid
    zero = float(lo)
    assert abs(zero - 2.404825557695773) < 1e-14
    assert abs(specfun.bessel_j(0, zero)) < 1e-15


def test_i2_of_225_from_integral_representation():
    # I_n(x) = (1/pi) int_0^pi exp(x cos t) cos(n t) dt, scaled by exp(-x)
    x = mp.mpf(225)
    ref = mp.quad(lambda t: mp.exp(x * (mp.cos(t) - 1)) * mp.cos(2 * t), [0, mp.pi / 8, mp.pi]) / mp.pi
    assert specfun.bessel_i_scaled(2, 225.0) == pytest.approx(float(ref), rel=1e-10)
    r = specfun.modified_bessel_i(2, 225.0)
    assert r.log() == pytest.approx(float(mp.log(ref) + x), rel=1e-14)


def test_laguerre_against_exact_monomials():
    n, x = 5, Fraction(37, 10)
    exact = sum(
        Fraction((-1) ** k * math.comb(n, k), math.factorial(k)) * x**k for k in range(n + 1)
    )
    assert specfun.laguerre(5, 3.7) == pytest.approx(float(exact), rel=1e-14)


def test_log_factorial_exact():
    assert specfun.log_factorial(20) == math.log(2432902008176640000)
    assert specfun.log_factorial(170) == pytest.approx(float(mp.log(mp.factorial(170))), rel=1e-15)
    assert specfun.log_factorial(10**6) == pytest.approx(float(mp.loggamma(10**6 + 1)), rel=1e-15)


def test_log_bessel_i_small_argument_does_not_underflow():
    ref = float(mp.log(mp.besseli(50, mp.mpf("1e-6"))))
    assert specfun.log_bessel_i(50, 1e-6) == pytest.approx(ref, rel=1e-14)
    assert specfun.log_bessel_i(3, 0.0) == -math.inf


@pytest.mark.parametrize("n", [1, 2, 7, 30, 150])
def test_j_three_term_recurrence(n):
    x = np.linspace(0.1, 500.0, 2001)
    lhs = specfun.bessel_j(n - 1, x) + specfun.bessel_j(n + 1, x)
    rhs = 2 * n / x * specfun.bessel_j(n, x)
    assert np.all(np.abs(lhs - rhs) <= 1e-12 * (1.0 + np.abs(rhs)))


@pytest.mark.parametrize("n", [1, 2, 7, 30, 150])
def test_i_three_term_recurrence(n):
    x = np.linspace(0.1, 500.0, 2001)
    a = specfun.bessel_i_scaled(n - 1, x)
    b = specfun.bessel_i_scaled(n + 1, x)
    c = 2 * n / x * specfun.bessel_i_scaled(n, x)
    scale = np.maximum(np.abs(a), 1e-300)
    assert np.max(np.abs(a - b - c) / scale) < 1e-12


@pytest.mark.parametrize("z", [0.3, 4.0, 17.5, 60.0])
def test_jacobi_anger(z):
    # e^{i z cos t} = sum_n i^n J_n(z) e^{i n t}; coefficients by trapezoid
    t = 2 * np.pi * np.arange(4096) / 4096
    f = np.exp(1j * z * np.cos(t))
    for n in (0, 1, 4, 11):
        coef = np.mean(f * np.exp(-1j * n * t))
        assert abs(coef - 1j**n * specfun.bessel_j(n, z)) < 1e-13


def test_neumann_sums():
    for x in (0.5, 9.0, 80.0):
        s = specfun.bessel_j(0, x) + 2 * sum(specfun.bessel_j(2 * k, x) for k in range(1, 101))
        assert s == pytest.approx(1.0, abs=1e-13)
        s = specfun.bessel_i_scaled(0, x) + 2 * sum(specfun.bessel_i_scaled(k, x) for k in range(1, 201))
        assert s == pytest.approx(1.0, rel=1e-13)


def test_arrays_and_scalars():
    x = np.array([0.5, 3.0, 40.0])
    out = specfun.bessel_j(2, x)
    assert out.shape == (3,)
    assert all(out[i] == specfun.bessel_j(2, float(x[i])) for i in range(3))
    assert isinstance(specfun.bessel_j(2, 3.0), float)


def test_negative_argument_parity():
    assert specfun.bessel_j(3, -2.7) == -specfun.bessel_j(3, 2.7)
    assert specfun.bessel_j(4, -2.7) == specfun.bessel_j(4, 2.7)


@pytest.mark.parametrize(
    "call",
    [
        lambda: specfun.bessel_j(-1, 1.0),
        lambda: specfun.bessel_j(201, 1.0),
        lambda: specfun.bessel_j(1.5, 1.0),
        lambda: specfun.bessel_j(1, math.nan),
        lambda: specfun.bessel_i_scaled(1, -0.1),
        lambda: specfun.log_factorial(-1),
        lambda: specfun.laguerre(2, math.inf),
    ],
)
def test_invalid_arguments(call):
    with pytest.raises(InvalidArgumentError):
        call()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 60), st.floats(0.0, 300.0))
def test_i_scaled_bounded(n, x):
    v = specfun.bessel_i_scaled(n, x)
    assert 0.0 <= v <= 1.0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 60), st.floats(0.0, 300.0))
def test_j_bounded(n, x):
    assert abs(specfun.bessel_j(n, x)) <= 1.0 + 1e-15


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 30), st.floats(0.0, 50.0))
def test_laguerre_recurrence_against_mpmath(n, x):
    ref = float(mp.laguerre(n, 0, x))
    assert specfun.laguerre(n, x) == pytest.approx(ref, rel=1e-9, abs=1e-9 * math.exp(x / 2))
