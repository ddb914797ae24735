"""Analytic-family ingredients on the real line and their graph convolutions.

* ``I_z(s) = 2^{-z/2} / Gamma(z/2) |s|^{z-1}`` (Re z > 0, continued in z).
* A band-limited mollifier ``H`` whose transform is the package bump
  rescaled to (-1, 1) with unit mass; ``phi_N(t) = H(t/N)`` and
  ``phi_N^(xi) = N H^(N xi)``.
* The smoothed kernel ``h = I_z * phi_N^`` evaluated either in space
  (direct convolution against the compactly supported ``phi_N^``) or in
  frequency (inverse transform of ``I_z^ . phi_N^^``).
* ``(nu * J)(x, s) = eta(x) h(s - phi(x))``.

With the transform ``int f(s) e^{-i s xi} ds`` one has
``I_z^ = sqrt(2 pi) I_{1-z}``; the extra ``sqrt(2 pi)`` is the price of the
non-unitary convention and is included in the frequency path.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from ._quadrature import composite_rule, panel_edges, power_singular_quad
from .errors import DomainError
from .measures import CutoffSpec, bump_hat, eval_bump, eval_density, eval_phase
from .specfun import rgamma_complex

SQRT_2PI = np.sqrt(2.0 * np.pi)


def I_z_eval(z, s):
    z = complex(z)
    s = np.asarray(s, dtype=float)
    if z.real <= 0:
        raise DomainError("I_z is a function only for Re z > 0; use smoothed_kernel_eval")
    if np.any(s == 0):
        raise DomainError("I_z is not evaluated at s = 0")
    return 2.0 ** (-z / 2) * rgamma_complex(z / 2) * np.abs(s) ** (z - 1)


def _frequency_kernel_coef(z):
    """Constant in I_{1-z}(xi) = coef |xi|^{-z}."""
    return 2.0 ** ((z - 1) / 2) * rgamma_complex((1 - z) / 2)


@dataclass(frozen=True)
class MollifierSpec:
    """``H^(u) = eta(2u) / int eta(2u) du`` for the package bump ``eta``.

    ``fft_log2`` and ``fft_step`` set the FFT that tabulates ``H`` for the
    frequency-side kernel path.
    """

    cutoff: CutoffSpec = field(default_factory=CutoffSpec)
    fft_log2: int = 21
    fft_step: float = 1.0 / 2048

    @property
    def mass(self):
        return 0.5 * (self.cutoff.inner + self.cutoff.outer)

    def H_hat(self, u):
        return eval_bump(self.cutoff, 2.0 * np.asarray(u, dtype=float)) / self.mass

    def H(self, tau):
        """Direct evaluation: ``H(tau) = eta^(tau/2) / (4 pi mass)``."""
        tau = np.asarray(tau, dtype=float)
        return (bump_hat(self.cutoff, tau.ravel() / 2.0) / (4.0 * np.pi * self.mass)).reshape(tau.shape)

    @property
    def H_sup(self):
        # H^ >= 0, so |H(tau)| <= H(0) = int H^ / (2 pi)
        return float(self.H(np.array([0.0]))[0])

    @property
    def tail(self):
        """Beyond this |tau| the mollifier is below double-precision noise."""
        return 1400.0 / self.cutoff.width

    @property
    def table(self):
        """Cubic spline of H on [0, tail] from an FFT of H^ samples."""
        return _mollifier_table(self)

    def H_table(self, tau):
        tau = np.abs(np.asarray(tau, dtype=float))
        out = np.zeros_like(tau)
        inside = tau <= self.tail
        out[inside] = self.table(tau[inside])
        return out


@lru_cache(maxsize=8)
def _mollifier_table(spec):
    size = 2**spec.fft_log2
    du = spec.fft_step
    u = (np.arange(size) - size // 2) * du
    vals = np.fft.ifft(np.fft.ifftshift(spec.H_hat(u))).real * size * du / (2.0 * np.pi)
    dtau = 2.0 * np.pi / (size * du)
    count = int(np.ceil(spec.tail / dtau)) + 4
    if count >= size // 2:
        raise ValueError("FFT too small for the requested tail")
    tau = np.arange(count) * dtau
    return CubicSpline(tau, vals[:count], bc_type=((1, 0.0), "not-a-knot"))


def mollifier_value(spec, N, lam):
    if N < 1:
        raise ValueError("N must be >= 1")
    return spec.H(np.asarray(lam, dtype=float) / N)


@dataclass(frozen=True)
class SmoothedKernel:
    """``h = I_z * phi_N^`` with an evaluation method tag.

    ``method``: 'auto' (space side wherever the convolution integral is
    defined, frequency side otherwise), 'space' or 'frequency'.
    """

    z: complex
    N: int
    method: str = "auto"
    mollifier: MollifierSpec = field(default_factory=MollifierSpec)

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        if self.z.real > 1:
            raise DomainError("smoothed kernels are used on Re z <= 1")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("N must be a positive integer")
        if self.method not in ("auto", "space", "frequency"):
            raise ValueError(f"unknown method {self.method!r}")


def _space_value(spec, s):
    """``c_z N^{1-z} int |N s - v|^{z-1} H^(v) dv`` over supp H^ = (-1, 1)."""
    z, N = spec.z, spec.N
    if z.real <= 0 and abs(N * s) < 1:
        raise DomainError("space-side integral diverges for Re z <= 0 and |s| < 1/N")
    coef = 2.0 ** (-z / 2) * rgamma_complex(z / 2) * N ** (1 - z)
    if coef == 0:
        return 0j
    x0 = N * s
    integral = power_singular_quad(spec.mollifier.H_hat, x0, -1.0, 1.0, z - 1, max_cell=0.02)
    return complex(coef * integral)


def _frequency_value(spec, s):
    """``2 sqrt(2 pi) C N^{1-z} int_0^inf cos(N s tau) tau^{-z} H(tau) dtau``.

    On ``[0, 1]`` the value at 0 is subtracted and its integral
    ``g(0) / (1 - z)`` added back; this is the analytic continuation of the
    tau-integral, so the path also covers ``1 <= Re z < 3`` (z != 1).
    """
    z, N = spec.z, spec.N
    if z == 1:
        raise DomainError("frequency side is not integrable at z = 1")
    coef = 2.0 * SQRT_2PI * _frequency_kernel_coef(z) * N ** (1 - z)
    if coef == 0:
        return 0j
    moll = spec.mollifier
    omega = N * s
    head_end = 1.0
    # one oscillation per 16-point panel
    width = min(0.5, 2.0 * np.pi / max(abs(omega), 1e-300))
    g0 = float(moll.H_table(np.array([0.0]))[0])
    head = power_singular_quad(
        lambda t: np.cos(omega * t) * moll.H_table(t) - g0, 0.0, 0.0, head_end, -z, max_cell=width
    )
    head += g0 * head_end ** (1 - z) / (1 - z)
    nodes, weighted = _body_rule(moll, head_end, width)
    body = np.sum(weighted * np.cos(omega * nodes) * nodes ** (-z))
    return complex(coef * (head + body))


@lru_cache(maxsize=64)
def _body_rule(moll, start, width):
    """Nodes on ``[start, tail]`` and weights already multiplied by ``H``."""
    nodes, weights = composite_rule(panel_edges(start, moll.tail, width), 16)
    return nodes, weights * moll.H_table(nodes)


def smoothed_kernel_eval(spec, s):
    s = np.asarray(s, dtype=float)
    out = np.empty(s.shape, dtype=complex)
    for idx, val in np.ndenumerate(s):
        method = spec.method
        if method == "auto":
            space_ok = spec.z.real > 0 or abs(spec.N * val) >= 1
            method = "space" if space_ok else "frequency"
        if spec.z == 1:
            method = "space"
        out[idx] = _space_value(spec, val) if method == "space" else _frequency_value(spec, val)
    return out


def nu_conv_J(gm, spec, x, sigma):
    """``eta(x) h(sigma - phi(x))``; zero wherever the cutoff vanishes."""
    x = np.asarray(x, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    dens = eval_density(gm, x)
    shift = sigma - eval_phase(gm.phase, x)
    dens, shift = np.broadcast_arrays(dens, shift)
    out = np.zeros(dens.shape, dtype=complex)
    live = dens != 0
    if np.any(live):
        out[live] = dens[live] * smoothed_kernel_eval(spec, shift[live])
    return out


def density_lp_mass(gm, p):
    """``int eta(w)^p dw`` over R^{2n} via 1-D radial quadrature."""
    from math import factorial

    def radial(c, power):
        nodes, weights = composite_rule(np.linspace(0.0, c.outer, 257), 16)
        return float(np.sum(weights * eval_bump(c, nodes) ** p * nodes**power))

    if gm.phase.kind == "power":
        c = gm.cutoffs[0]
        return gm.weight**p * np.pi**gm.n / factorial(gm.n - 1) * radial(c, gm.n - 1)
    out = gm.weight**p
    for c in gm.cutoffs:
        out *= np.pi * radial(c, 0)
    return out


def kernel_lp_norm(spec, p, s_max=200.0, points=201):
    """``(int |h(s)|^p ds)^{1/p}`` with a power-law tail beyond ``s_max``.

    Returns ``(norm, tail_fraction)``; the tail uses the decay
    ``|h(s)| ~ |s|^{Re z - 1}`` of the kernel away from the origin.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    edges = np.concatenate([-np.geomspace(s_max, 1e-3, points // 2), [0.0], np.geomspace(1e-3, s_max, points // 2)])
    nodes, weights = composite_rule(edges, 4)
    vals = np.abs(smoothed_kernel_eval(spec, nodes)) ** p
    body = float(np.sum(weights * vals))
    decay = p * (1.0 - spec.z.real) - 1.0
    if decay <= 0:
        return np.inf, np.inf
    edge = np.abs(smoothed_kernel_eval(spec, np.array([-s_max, s_max]))) ** p
    tail = float(np.sum(edge) * s_max / decay)
    total = body + tail
    return total ** (1.0 / p), tail / total if total else 0.0


def nu_conv_J_lp_norm(gm, spec, p, **kw):
    """L^p(H^n) norm of ``nu * J``; it factorizes into the cutoff and kernel parts."""
    knorm, tail = kernel_lp_norm(spec, p, **kw)
    return density_lp_mass(gm, p) ** (1.0 / p) * knorm, tail


def decay_profile(spec, s):
    """``|h(s)| * |s - sign(s)/N|^2`` at the given points (|s| >= (N+1)/N)."""
    s = np.asarray(s, dtype=float)
    if np.any(np.abs(s) < (spec.N + 1) / spec.N):
        raise DomainError("decay profile is defined for |s| >= (N+1)/N")
    return np.abs(smoothed_kernel_eval(spec, s)) * np.abs(s - np.sign(s) / spec.N) ** 2


def bump_hat_tabulated(cutoff, v):
    """Bump transform read from the mollifier's FFT table.

    Uses ``eta^(v) = 4 pi mass H(2v)``; zero beyond the table's tail.
    Much cheaper than :func:`heisconv.measures.bump_hat` on large grids.
    """
    moll = MollifierSpec(cutoff)
    return 4.0 * np.pi * moll.mass * moll.H_table(2.0 * np.asarray(v, dtype=float))


def decay_trend(s, ratio, decade=10.0):
    """Power-law growth rate of a decay profile over its last decade.

    Fits ``log r = a + beta log|s| + gamma/|s|``; the ``1/|s|`` term absorbs
    the approach of the profile to its limit, so ``beta`` measures only
    genuine growth (``beta <= 0`` when trend-free). Identically zero
    profiles give 0.
    """
    s = np.abs(np.asarray(s, dtype=float))
    ratio = np.asarray(ratio, dtype=float)
    tail = (s >= s.max() / decade) & (ratio > 0)
    if tail.sum() < 4:
        return 0.0
    A = np.stack([np.ones(tail.sum()), np.log(s[tail]), 1.0 / s[tail]], axis=1)
    coef = np.linalg.lstsq(A, np.log(ratio[tail]), rcond=None)[0]
    return float(coef[1])
