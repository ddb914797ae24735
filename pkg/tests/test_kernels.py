import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from heisconv import GraphMeasure, I_z_eval, MollifierSpec, PhaseSpec, SmoothedKernel, decay_profile
from heisconv import kernel_lp_norm, mollifier_value, nu_conv_J, smoothed_kernel_eval
from heisconv.errors import DomainError
from heisconv.kernels import bump_hat_tabulated, density_lp_mass
from heisconv.measures import CutoffSpec, bump_hat

MOLL = MollifierSpec()


def test_I_z_example():
    # I_1(s) = 2^{-1/2} / Gamma(1/2)
    assert I_z_eval(1.0, 3.0) == pytest.approx(1 / np.sqrt(2 * np.pi))
    with pytest.raises(DomainError):
        I_z_eval(-0.5, 1.0)
    with pytest.raises(DomainError):
        I_z_eval(0.5, 0.0)


def test_mollifier_normalization():
    assert MOLL.mass == pytest.approx(1.5)
    # H(0) = int H^ / (2 pi) = 1 / (2 pi)
    assert MOLL.H_sup == pytest.approx(1 / (2 * np.pi), rel=1e-13)
    total = integrate.quad(lambda u: MOLL.H_hat(u), -1, 1, points=[-0.5, 0.5])[0]
    assert total == pytest.approx(1.0, rel=1e-10)


def test_mollifier_table_vs_direct():
    tau = np.linspace(0, 60, 601)
    np.testing.assert_allclose(MOLL.H_table(tau), MOLL.H(tau), atol=1e-13)
    assert MOLL.H_table(np.array([1e4]))[0] == 0.0


@settings(max_examples=25, deadline=None)
@given(st.floats(-50, 50), st.integers(1, 20))
def test_mollifier_dilation(lam, N):
    # phi_N(lam) = phi_{2N}(2 lam)
    assert mollifier_value(MOLL, N, lam) == pytest.approx(mollifier_value(MOLL, 2 * N, 2 * lam), rel=1e-14, abs=1e-16)


def test_mollifier_is_bounded_by_value_at_zero():
    lam = np.linspace(-200, 200, 2001)
    assert np.all(np.abs(mollifier_value(MOLL, 3, lam)) <= MOLL.H_sup + 1e-15)


def test_bump_hat_tabulated():
    c = CutoffSpec()
    v = np.array([0.0, 0.4, 3.3, 25.0])
    np.testing.assert_allclose(bump_hat_tabulated(c, v), bump_hat(c, v), atol=1e-12)


@pytest.mark.parametrize("z", [0.5, 0.3 + 2j, 1.0 + 0.5j])
def test_space_vs_frequency(z):
    s = np.array([-7.0, -1.3, -0.2, 0.0, 0.45, 2.0, 9.5])
    a = smoothed_kernel_eval(SmoothedKernel(z, 3, "space"), s)
    b = smoothed_kernel_eval(SmoothedKernel(z, 3, "frequency"), s)
    np.testing.assert_allclose(a, b, rtol=1e-8)


def test_space_against_scipy_quad():
    # direct oracle for Re z > 0: c_z int |s - u|^{z-1} phi_N^(u) du with phi_N^(u) = N H^(N u)
    z, N, s = 0.6, 2, 0.3
    cz = 2 ** (-z / 2) / special.gamma(z / 2)
    f = lambda u: abs(s - u) ** (z - 1) * N * MOLL.H_hat(N * u)
    ref = cz * sum(integrate.quad(f, a, b, limit=200)[0] for a, b in [(-0.5, s), (s, 0.5)])
    assert smoothed_kernel_eval(SmoothedKernel(z, N), s) == pytest.approx(ref, rel=1e-9)


def test_z_zero_is_mollifier():
    s = np.linspace(-0.45, 0.45, 7)
    h = smoothed_kernel_eval(SmoothedKernel(0.0, 1), s)
    np.testing.assert_allclose(h.real, MOLL.H_hat(s), rtol=1e-8)


def test_negative_even_z_vanishes_off_support():
    s = np.array([-3.0, 1.5, 8.0])
    np.testing.assert_array_equal(smoothed_kernel_eval(SmoothedKernel(-2.0, 1), s), 0.0)


def test_kernel_linear_in_dilation_factor():
    # h_{z,N}(s) = N^{1-z} h_{z,1}(N s) away from the singular set
    z = -1.0 + 0.5j
    a = smoothed_kernel_eval(SmoothedKernel(z, 4), np.array([3.0]))[0]
    b = smoothed_kernel_eval(SmoothedKernel(z, 1), np.array([12.0]))[0]
    assert a == pytest.approx(4 ** (1 - z) * b, rel=1e-10)


def test_kernel_validation():
    with pytest.raises(DomainError):
        SmoothedKernel(1.5, 1)
    with pytest.raises(ValueError):
        SmoothedKernel(0.5, 0)
    with pytest.raises(ValueError):
        SmoothedKernel(0.5, 1, "fourier")
    with pytest.raises(DomainError):
        smoothed_kernel_eval(SmoothedKernel(-1.0, 1, "space"), 0.2)
    with pytest.raises(DomainError):
        decay_profile(SmoothedKernel(-1.0, 2), np.array([1.2]))


def test_decay_profile_bounded():
    for z in (-1.0, -2.0 + 1j):
        s = np.geomspace(2.0, 100.0, 15)
        r = decay_profile(SmoothedKernel(z, 1), np.concatenate([s, -s]))
        assert np.all(np.isfinite(r))
        assert r[14] <= 1.05 * r[10]


def test_nu_conv_J_support():
    gm = GraphMeasure(1, PhaseSpec.quadratic([1.0]))
    spec = SmoothedKernel(-1.0, 1)
    x = np.array([[0.2, 0.1], [2.0, 0.0]])
    v = nu_conv_J(gm, spec, x, np.array([3.0, 3.0]))
    assert v[1] == 0
    assert v[0] == pytest.approx(smoothed_kernel_eval(spec, np.array([3.0 - 0.05]))[0])


def test_density_lp_mass():
    gm = GraphMeasure(1, PhaseSpec.quadratic([1.0]))
    assert density_lp_mass(gm, 1) == pytest.approx(1.5 * np.pi, rel=1e-10)
    pw = GraphMeasure(1, PhaseSpec.power(2))
    assert density_lp_mass(pw, 1) == pytest.approx(1.5 * np.pi, rel=1e-10)


def test_kernel_lp_norm_finite():
    norm, tail = kernel_lp_norm(SmoothedKernel(-1.0, 1), 2)
    assert np.isfinite(norm) and norm > 0 and tail < 1e-6


def test_decay_trend_model():
    from heisconv import decay_trend

    s = np.geomspace(2, 100, 40)
    assert abs(decay_trend(s, 0.4 * (1 - 2 / s))) < 1e-2
    assert decay_trend(s, s**0.5) == pytest.approx(0.5, abs=1e-9)
    assert decay_trend(s, np.zeros_like(s)) == 0.0
