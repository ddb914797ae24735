import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from heisconv import CutoffSpec, GraphMeasure, PhaseSpec
from heisconv.errors import DomainError
from heisconv.measures import eval_bump
from heisconv.specfun import laguerre
from heisconv.spectral import (
    DiagonalEntry,
    MultiIndex,
    PoliradialKernel,
    R_lambda_hat,
    R_lambda_sup,
    fit_loglog,
    laguerre_hat_l1,
    mu_bound,
    mu_bound_sweep,
    mu_entry,
    plancherel_constant,
    plancherel_ratio,
    radial_factor,
    signed_log_grid,
    upsilon_bound,
    upsilon_entry,
    upsilon_strip_edge,
    vdc_constant,
)

GM1 = GraphMeasure(1, PhaseSpec.quadratic([1.0]))


def test_small_helpers():
    assert plancherel_constant(2) == pytest.approx(4 * np.pi**2)
    assert MultiIndex((2, 3)).order == 5
    with pytest.raises(ValueError):
        MultiIndex((1, -1))
    with pytest.raises(ValueError):
        MultiIndex((40,)).check_bound(30)
    with pytest.raises(DomainError):
        DiagonalEntry(0, 0.0, 0j, 1, 0j, 0.0)
    with pytest.raises(ValueError):
        DiagonalEntry(0, 1.0, 0j, 1, 0j, -1.0)
    g = signed_log_grid(1e-2, 1e3, 2)
    np.testing.assert_allclose(g, -g[::-1])
    assert g.size == 22 and 0 not in g


def test_radial_factor_plateau_example():
    # a = 0, k = 0: |lam|^{-1} int_0^{|lam|/2} e^{-s/2} ds (plus a negligible transition)
    assert radial_factor(0, 100.0, 0.0) == pytest.approx(0.02, rel=1e-9)


def test_radial_factor_oracle():
    k, lam, a = 3, -5.0, 0.7
    c = CutoffSpec()

    def part(fn):
        f = lambda s: eval_bump(c, 2 * s / abs(lam)) * laguerre(k, 0, s) * np.exp(-s / 2) * fn(-2 * a * s)
        return integrate.quad(f, 0, 5.0, limit=400, points=[2.5])[0]

    ref = (part(np.cos) + 1j * part(np.sin)) / abs(lam)
    assert radial_factor(k, lam, a) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("k,lam,a", [(0, 3.0, 1.0), (7, -20.0, 1.0), (15, 0.4, -0.5)])
def test_radial_two_routes_agree(k, lam, a):
    d = radial_factor(k, lam, a)
    c = radial_factor(k, lam, a, method="convolution")
    assert abs(d - c) <= 1e-9 * max(abs(d), 1e-6)


def test_mu_entry_error_and_product():
    gm2 = GraphMeasure(2, PhaseSpec.quadratic([1.0, 2.0]))
    e = mu_entry(-2.0 + 1j, 10, (3, 1), 2.5, gm2)
    assert e.error < 1e-10 * abs(e.value)
    f1 = radial_factor(3, 2.5, 1.0)
    f2 = radial_factor(1, 2.5, 2.0)
    e1 = mu_entry(-2.0 + 1j, 10, (0,), 2.5, GM1)
    ratio = e.value / (f1 * f2)
    assert ratio == pytest.approx(e1.value / radial_factor(0, 2.5, 1.0), rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.integers(0, 12), st.sampled_from([1, 10, 100]), st.floats(0, 5))
def test_mu_below_bound(loglam, k, N, y):
    lam = 10.0**loglam
    z = complex(-1, y)
    assert abs(mu_entry(z, N, (k,), lam, GM1).value) <= mu_bound(z, GM1)


def test_mu_linear_in_weight():
    a = mu_entry(-1.0, 1, (2,), 1.5, GM1).value
    b = mu_entry(-1.0, 1, (2,), 1.5, GM1.scaled(3.0)).value
    assert b == pytest.approx(3 * a, rel=1e-14)


def test_mu_sweep_rows():
    rows = mu_bound_sweep(GM1, [-1.0], [1], signed_log_grid(0.1, 10, 1), 5)
    assert len(rows) == 6
    for z, N, alpha, lam, mag, bound, ratio in rows:
        assert ratio == pytest.approx(mag / bound) and ratio <= 1.0


def test_upsilon_reduces_to_mu():
    # n = 1, m = 1 gives the quadratic phase with a = 1
    for k, lam in [(0, 2.0), (4, -7.0)]:
        u = upsilon_entry(-1.0 + 1j, 4, k, lam, 1, 1)
        m = mu_entry(-1.0 + 1j, 4, (k,), lam, GM1)
        assert u.value == pytest.approx(m.value, rel=1e-10)


def test_upsilon_below_bound():
    for m in (2, 3):
        z = complex(upsilon_strip_edge(2, m), 1.0)
        bound = upsilon_bound(z, m, 2)
        for lam in (-300.0, -1.0, 0.05, 4.0, 900.0):
            assert abs(upsilon_entry(z, 10, 5, lam, m, 2).value) <= bound


def test_constants():
    assert vdc_constant(2) == pytest.approx(8 / np.sqrt(8))
    assert vdc_constant(3) == pytest.approx(18 / 48 ** (1 / 3))
    assert laguerre_hat_l1(2) == pytest.approx(2 * np.pi)
    ref = integrate.quad(lambda x: (0.25 + x * x) ** -1.5, -np.inf, np.inf)[0]
    assert laguerre_hat_l1(3) == pytest.approx(ref, rel=1e-10)
    with pytest.raises(DomainError):
        laguerre_hat_l1(1)
    assert upsilon_strip_edge(2, 2) == -1.5


@pytest.mark.parametrize("lam,m,xi", [(5.0, 2, 1.3), (-3.0, 3, -2.0), (12.0, 2, 30.0)])
def test_R_hat_oracle(lam, m, xi):
    L = abs(lam)
    ph = lambda s: 2**m * np.sign(lam) * L ** (1 - m) * s**m - xi * s
    re = integrate.quad(lambda s: np.cos(ph(s)), 0, L, limit=500)[0]
    im = integrate.quad(lambda s: np.sin(ph(s)), 0, L, limit=500)[0]
    assert R_lambda_hat(lam, m, np.array([xi]))[0] == pytest.approx(re + 1j * im, rel=1e-9)


def test_R_sup_below_vdc():
    for m in (2, 3):
        for lam in (1.0, 30.0, 500.0):
            assert R_lambda_sup(lam, m) <= vdc_constant(m) * lam ** ((m - 1) / m)


@given(st.floats(-3, 3), st.floats(0.1, 10))
def test_fit_loglog_exact(slope, c):
    x = np.geomspace(1, 100, 7)
    s, icpt, r2 = fit_loglog(x, c * x**slope)
    assert s == pytest.approx(slope, abs=1e-9)
    assert r2 == pytest.approx(1.0, abs=1e-9) or abs(slope) < 1e-9


def test_plancherel_gaussian_and_scaling():
    ker = PoliradialKernel(lambda r, t: np.exp(-r**2 - t**2), 6.0, 7.0, r_panels=32, t_panels=32)
    res = plancherel_ratio(ker, lam_panels=16)
    assert res.ratio == pytest.approx(1.0, rel=1e-3)
    res3 = plancherel_ratio(ker.scaled(3.0), lam_panels=16)
    assert res3.ratio == pytest.approx(res.ratio, rel=1e-12)
    assert res3.l2_squared == pytest.approx(9 * res.l2_squared, rel=1e-12)


@pytest.mark.parametrize("m", [2, 3])
def test_upsilon_decay_within_envelope(m):
    # the lam-dependence besides the exact prefactor is |lam|^{-n} |lam|^{(m-1)/m} at most
    from heisconv.spectral import _upsilon_integral

    n = 2
    lams = np.geomspace(100.0, 1000.0, 9)
    vals = [abs(_upsilon_integral(0, lam, m, n, CutoffSpec())) for lam in lams]
    slope, _, _ = fit_loglog(lams, vals)
    assert slope <= -n + (m - 1) / m + 0.05
