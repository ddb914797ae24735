"""One test per acceptance criterion, each at its stated tolerance.

Every test appends a ``PASS``/``FAIL`` line to ``RESULTS``; the lines are
printed in the terminal summary.
"""

import time

import numpy as np
import pytest

from heisconv import (
    GraphMeasure,
    Grid,
    HPoint,
    PhaseSpec,
    PoliradialKernel,
    QuadratureSpec,
    SampledField,
    ScalingLadder,
    SmoothedKernel,
    TypePoint,
    apply_adjoint,
    apply_Tnu,
    commutation_gap,
    decay_profile,
    decay_trend,
    fourier_quadrature,
    F_nk,
    F_nk_hat,
    group_mul_arrays,
    mu_bound_sweep,
    plancherel_ratio,
    predicted_exponent,
    smoothed_kernel_eval,
    thm1_vertex,
    vdc_envelope,
)
from heisconv.spectral import signed_log_grid, vdc_constant
from heisconv.typeset import ConvContext, ladder_samples, scaling_experiment

RESULTS = []
XI = np.linspace(-10.0, 10.0, 41)


def record(number, name, passed, detail):
    RESULTS.append(f"criterion {number} [{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    assert passed, detail


def test_c1_closed_form_transform():
    start = time.perf_counter()
    worst = 0.0
    for n in (1, 2, 3):
        for k in range(11):
            closed = F_nk_hat(n, k, XI)
            for xi, c in zip(XI, closed):
                q = fourier_quadrature(lambda s: F_nk(n, k, s), xi, tol=1e-14, rtol=1e-10)
                worst = max(worst, abs(q - c) / abs(c))
    elapsed = time.perf_counter() - start
    record(1, "closed-form transform vs quadrature", worst <= 1e-8 and elapsed <= 60,
           f"max relerr {worst:.2e} (<= 1e-8), {elapsed:.1f} s (<= 60 s)")


def test_c2_modulus_identity():
    worst = max(float(np.max(np.abs(np.abs(F_nk_hat(1, k, XI)) - (0.25 + XI**2) ** -0.5))) for k in range(21))
    record(2, "n=1 modulus identity", worst <= 1e-10, f"max deviation {worst:.2e} (<= 1e-10)")


def test_c3_uniform_l2_bound():
    start = time.perf_counter()
    lams = signed_log_grid(1e-2, 1e3, 6)
    worst = {}
    for n in (1, 2):
        gm = GraphMeasure(n, PhaseSpec.quadratic([1.0] * n))
        rows = mu_bound_sweep(gm, [complex(-n, y) for y in (0.0, 1.0, 5.0)], [1, 10, 100], lams, 30)
        worst[n] = max(r[-1] for r in rows)
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) <= 1.0 and elapsed <= 600
    record(3, "uniform bound on the multiplier entries", ok,
           f"max ratio n=1 {worst[1]:.3g}, n=2 {worst[2]:.3g} (<= 1), {elapsed:.1f} s (<= 600 s)")


@pytest.mark.parametrize("m", [2, 3])
def test_c4_van_der_corput(m):
    res = vdc_envelope(m)
    bounded = max(res.ratios) <= vdc_constant(m)
    ok = abs(res.slope - res.expected) <= 0.05 and res.ratio_trend <= 0.05 and bounded
    record(4, f"oscillatory envelope m={m}", ok,
           f"slope {res.slope:.4f} vs {res.expected:.4f} +- 0.05, ratio trend {res.ratio_trend:.2e}, "
           f"max ratio {max(res.ratios):.3f} <= {vdc_constant(m):.3f}")


def test_c5_scaling_exponents():
    start = time.perf_counter()
    gm = GraphMeasure(1, PhaseSpec.quadratic([1.0]))
    ladder = ScalingLadder()
    ctx = ConvContext()
    samples = ladder_samples(gm, ladder, ctx)
    parts, ok = [], True
    for p, q in [(4 / 3, 4.0), (2.0, 2.0), (1.2, 1.5)]:
        res = scaling_experiment(TypePoint(1 / p, 1 / q), gm, ladder, ctx, samples)
        good = abs(res.fitted - res.predicted) <= 0.1
        ok &= good
        parts.append(f"(p,q)=({p:.4g},{q:.4g}) fitted {res.fitted:.4f} predicted {res.predicted:.4f}")
    inf = samples.infimum(1)
    ok &= min(inf) > 0 and max(inf) / min(inf) < 2
    elapsed = time.perf_counter() - start
    ok &= elapsed <= 1800
    record(5, "scaling exponents", ok,
           "; ".join(parts) + f"; infimum {min(inf):.3f}..{max(inf):.3f}; {elapsed:.1f} s")


def test_c6_plancherel_constancy():
    kernels = {
        "gaussian": PoliradialKernel(lambda r, t: np.exp(-r**2 - t**2), 6.0, 7.0),
        "polynomial": PoliradialKernel(lambda r, t: (1 + r**2) * np.exp(-2 * r**2 - t**2 / 2) * np.cos(t), 5.0, 10.0),
        "twisted": PoliradialKernel(lambda r, t: np.exp(-(r**2) * (1 + t**2 / 4) - t**2 - (t - r**2) ** 2), 6.0, 7.0),
    }
    ratios = {name: plancherel_ratio(k).ratio for name, k in kernels.items()}
    spread = (max(ratios.values()) - min(ratios.values())) / min(ratios.values())
    detail = ", ".join(f"{k} {v:.6f}" for k, v in ratios.items())
    record(6, "Plancherel ratio constancy", spread <= 0.02, f"{detail}; spread {spread:.2e} (<= 2e-2)")


def test_c7_kernel_decay_and_agreement():
    worst_trend, finite = -np.inf, True
    for z in (-1.0, -1.0 + 1j, -2.0, -2.0 + 1j):
        for N in (1, 4, 16):
            mags = np.geomspace((N + 1) / N, 100.0, 40)
            for sign in (1.0, -1.0):
                r = decay_profile(SmoothedKernel(z, N), sign * mags)
                finite &= bool(np.all(np.isfinite(r)))
                worst_trend = max(worst_trend, decay_trend(mags, r))
    s = np.linspace(-10.0, 10.0, 21)
    gap = 0.0
    for z in (0.1, 0.5, 1.0 + 1j, 0.3 + 2j):
        for N in (1, 4, 16):
            a = smoothed_kernel_eval(SmoothedKernel(z, N, "space"), s)
            b = smoothed_kernel_eval(SmoothedKernel(z, N, "frequency"), s)
            gap = max(gap, float(np.max(np.abs(a - b) / np.abs(a))))
    ok = finite and worst_trend <= 0.05 and gap <= 1e-6
    record(7, "smoothed kernel decay and two-path agreement", ok,
           f"finite={finite}, max growth power {worst_trend:.2e} (<= 0.05), max relative gap {gap:.2e} (<= 1e-6)")


def _gauss(cx, cy, ct):
    return lambda x, t: np.exp(-((x[:, 0] - cx) ** 2 + (x[:, 1] - cy) ** 2 + (t - ct) ** 2) / 0.25)


def test_c8_structural():
    rng = np.random.default_rng(7)
    x, y, u = (rng.uniform(-3, 3, (10_000, 2)) for _ in range(3))
    t, s, r = (rng.uniform(-3, 3, 10_000) for _ in range(3))
    lhs = group_mul_arrays(*group_mul_arrays(x, t, y, s), u, r)
    rhs = group_mul_arrays(x, t, *group_mul_arrays(y, s, u, r))
    assoc = max(float(np.max(np.abs(a - b) / np.maximum(1, np.abs(b)))) for a, b in zip(lhs, rhs))
    inv = group_mul_arrays(x, t, -x, -t)
    inverse = max(float(np.max(np.abs(inv[0]))), float(np.max(np.abs(inv[1]))))
    axioms = max(assoc, inverse)

    gm = GraphMeasure(1, PhaseSpec.quadratic([1.0]))
    q = QuadratureSpec(24, interp_order=3)
    duality = []
    for h in (0.5, 0.25):
        g = Grid.from_spacing(1, (2.5, 2.5, 3.0), h)
        f = SampledField.from_function(g, _gauss(0.3, 0.0, 0.2))
        k = SampledField.from_function(g, lambda x, t: _gauss(-0.2, 0.4, -0.5)(x, t) * (1 + 0.5 * x[:, 0]))
        a = np.sum(apply_Tnu(f, gm, q).values * k.values)
        b = np.sum(f.values * apply_adjoint(k, gm, q).values)
        duality.append(abs(a - b) / abs(a))
    comm = []
    qc = QuadratureSpec(16, interp_order=3)
    for h in (0.5, 0.375, 0.25):
        g = Grid.from_spacing(1, (3.0, 3.0, 3.0), h)
        f = SampledField.from_function(g, _gauss(0.3, 0.0, 0.2))
        comm.append(commutation_gap(f, gm, qc, HPoint([0.3, -0.2], 0.25)))
    C = thm1_vertex(1)
    geometry = max(abs(C.ip + C.iq - 1), abs(C.iq - (3 * C.ip - 2)), abs(predicted_exponent(C, 1)))
    ok = (
        axioms <= 1e-12
        and duality[-1] <= 1e-3
        and duality[1] < duality[0]
        and all(b < a for a, b in zip(comm, comm[1:]))
        and geometry <= 1e-12
    )
    record(8, "structural suites", ok,
           f"group axioms {axioms:.1e}; duality gap {duality[0]:.1e} -> {duality[1]:.1e} (<= 1e-3); "
           f"commutation gap {' -> '.join(f'{c:.1e}' for c in comm)}; vertex identities {geometry:.1e}")
