import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from heisconv import F_nk, F_nk_hat, fourier_quadrature, gamma_complex, laguerre, laguerre_all, rgamma_complex
from heisconv.errors import AccuracyError, PoleError
from heisconv.specfun import factorial_ratio


@given(st.floats(-20, 20), st.floats(-20, 20))
def test_gamma_matches_scipy(x, y):
    z = complex(x, y)
    if y == 0 and x <= 0 and x == round(x):
        return
    ref = special.gamma(z)
    if not np.isfinite(ref) or abs(ref) < 1e-250:
        return
    assert abs(gamma_complex(z) - ref) <= 1e-12 * abs(ref)


@given(st.floats(-30, 30), st.floats(-10, 10))
def test_rgamma_matches_scipy(x, y):
    z = complex(x, y)
    ref = special.rgamma(z)
    assert abs(rgamma_complex(z) - ref) <= 1e-12 * max(1.0, abs(ref))


def test_poles():
    with pytest.raises(PoleError):
        gamma_complex(-3.0)
    np.testing.assert_array_equal(rgamma_complex(np.array([0.0, -1.0, -7.0])), 0.0)
    assert gamma_complex(0.5) == pytest.approx(np.sqrt(np.pi), rel=1e-14)


def test_laguerre_matches_scipy():
    s = np.linspace(0, 40, 81)
    for a in (0, 1, 2):
        for k in (0, 1, 5, 17, 30):
            np.testing.assert_allclose(laguerre(k, a, s), special.eval_genlaguerre(k, a, s), rtol=1e-9, atol=1e-9)
        allv = laguerre_all(30, a, s)
        np.testing.assert_allclose(allv[17], laguerre(17, a, s), rtol=1e-13)


def test_gaussian_laguerre_moment():
    # int_0^inf L_k(s) e^{-A s} ds = (A-1)^k / A^{k+1}; checks the recurrence in a closed form
    A = 1.3
    for k in (0, 3, 8):
        val = fourier_quadrature(lambda s: laguerre(k, 0, s) * np.exp(-(A - 0.5) * s) * np.exp(-s / 2), 0.0)
        assert val.real == pytest.approx((A - 1) ** k / A ** (k + 1), rel=1e-10)


def test_F_hat_examples():
    assert F_nk_hat(1, 0, 0.0) == pytest.approx(2.0)
    # n=2, k=0: 1/(1/2 + i xi)^2
    xi = 0.7
    assert F_nk_hat(2, 0, xi) == pytest.approx(1 / (0.5 + 1j * xi) ** 2, rel=1e-14)
    # n=1, k=3 rational form
    assert F_nk_hat(1, 3, xi) == pytest.approx((-0.5 + 1j * xi) ** 3 / (0.5 + 1j * xi) ** 4, rel=1e-13)


def test_F_hat_vs_quadrature():
    for n, k in [(1, 0), (1, 7), (2, 4), (3, 10)]:
        for xi in (-3.0, 0.0, 2.5):
            q = fourier_quadrature(lambda s: F_nk(n, k, s), xi, tol=1e-14, rtol=1e-10)
            c = F_nk_hat(n, k, xi)
            assert abs(q - c) <= 1e-9 * abs(c)


@given(st.integers(0, 60), st.floats(-100, 100))
def test_modulus_identity_n1(k, xi):
    assert abs(abs(F_nk_hat(1, k, xi)) - (0.25 + xi * xi) ** -0.5) <= 1e-10


def test_F_zero_for_negative():
    np.testing.assert_array_equal(F_nk(2, 3, np.array([-1.0, 0.0])), 0.0)


def test_factorial_ratio():
    assert factorial_ratio(5, 3) == math.factorial(7) / math.factorial(5)
    assert factorial_ratio(200, 3) == pytest.approx(201 * 202, rel=1e-12)


def test_fourier_quadrature_raises():
    with pytest.raises(AccuracyError):
        fourier_quadrature(lambda s: np.ones_like(s), 0.0)
    with pytest.raises(ValueError):
        fourier_quadrature(np.exp, 0.0, domain=(-np.inf, 0.0))
