"""Special functions: complex Gamma, Laguerre polynomials and the functions

    F_{n,k}(s) = 1_{s>0} L_k^{n-1}(s) exp(-s/2) s^{n-1}

whose Fourier transform (convention ``int g(s) exp(-i s xi) ds``) has the
closed form ``(k+n-1)!/k! * (-1/2 + i xi)^k / (1/2 + i xi)^{k+n}``.
"""

import math

import numpy as np

from ._quadrature import adaptive_gl, panel_edges
from .errors import AccuracyError, PoleError, RangeError

# Lanczos approximation, g = 7, nine terms
_LANCZOS_G = 7.0
_LANCZOS_COEF = np.array(
    [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ]
)


def _lanczos(z):
    """Gamma(z) for Re z >= 1/2 (array input)."""
    z = z - 1.0
    acc = np.full(z.shape, _LANCZOS_COEF[0], dtype=complex)
    for i in range(1, _LANCZOS_COEF.size):
        acc = acc + _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return np.sqrt(2 * np.pi) * np.exp((z + 0.5) * np.log(t) - t) * acc


def _sin_pi(z):
    """sin(pi z) with the argument reduced near integers."""
    k = np.round(z.real)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    return sign * np.sin(np.pi * (z - k))


def _is_pole(z):
    return (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))


def gamma_complex(z):
    """Gamma function for complex (array) arguments.

    Lanczos series on Re z >= 1/2, reflection formula below. Raises
    :class:`PoleError` at non-positive integers.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if np.any(_is_pole(z)):
        raise PoleError(f"Gamma has a pole at {z[_is_pole(z)][0]}")
    out = np.empty_like(z)
    right = z.real >= 0.5
    out[right] = _lanczos(z[right])
    left = ~right
    if np.any(left):
        zl = z[left]
        out[left] = np.pi / (_sin_pi(zl) * _lanczos(1.0 - zl))
    return out[0] if scalar else out


def rgamma_complex(z):
    """1/Gamma(z); entire, exactly 0 at the poles of Gamma."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    right = z.real >= 0.5
    out[right] = 1.0 / _lanczos(z[right])
    left = ~right
    if np.any(left):
        zl = z[left]
        out[left] = _sin_pi(zl) * _lanczos(1.0 - zl) / np.pi
        out[left & _is_pole(z)] = 0.0
    return out[0] if scalar else out


def laguerre(k, a, s):
    """Generalized Laguerre polynomial ``L_k^a(s)`` by the three-term recurrence."""
    s = np.asarray(s, dtype=float)
    prev = np.ones_like(s)
    if k == 0:
        return prev
    cur = 1.0 + a - s
    for j in range(1, k):
        prev, cur = cur, ((2 * j + 1 + a - s) * cur - (j + a) * prev) / (j + 1)
    return cur


def laguerre_all(kmax, a, s):
    """Array of ``L_0^a(s) ... L_kmax^a(s)`` stacked on a new leading axis."""
    s = np.asarray(s, dtype=float)
    out = np.empty((kmax + 1,) + s.shape)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = 1.0 + a - s
    for j in range(1, kmax):
        out[j + 1] = ((2 * j + 1 + a - s) * out[j] - (j + a) * out[j - 1]) / (j + 1)
    return out


def F_nk(n, k, sigma):
    sigma = np.asarray(sigma, dtype=float)
    pos = sigma > 0
    sp = np.where(pos, sigma, 0.0)
    val = laguerre(k, n - 1, sp) * np.exp(-sp / 2) * sp ** (n - 1)
    return np.where(pos, val, 0.0)


def factorial_ratio(k, n):
    """``(k+n-1)! / k!`` exactly when small, via log-Gamma otherwise."""
    if k + n - 1 <= 170:
        return math.factorial(k + n - 1) / math.factorial(k)
    log_ratio = math.lgamma(k + n) - math.lgamma(k + 1)
    if log_ratio > 709.0:
        raise RangeError(f"(k+n-1)!/k! overflows for k={k}, n={n}")
    return math.exp(log_ratio)


def F_nk_hat(n, k, xi):
    """Closed-form Fourier transform of :func:`F_nk`, in polar form."""
    xi = np.asarray(xi, dtype=float)
    coef = factorial_ratio(k, n)
    modulus = np.hypot(0.5, xi)
    angle = k * np.arctan2(xi, -0.5) - (k + n) * np.arctan2(xi, 0.5)
    return coef * modulus ** (-n) * np.exp(1j * angle)


def _tail_cutoff(f, a, tol):
    b = max(a, 0.0) + 8.0
    for _ in range(60):
        probe = np.linspace(b, 2 * b, 257)
        if np.max(np.abs(f(probe))) * 2 * b < 1e-3 * tol:
            return b
        b *= 2
    raise AccuracyError(f"integrand does not decay on [{a}, inf)")


def fourier_quadrature(f, xi, domain=(0.0, np.inf), tol=1e-12, full_output=False, rtol=0.0):
    """Adaptive estimate of ``int_domain f(s) exp(-i s xi) ds``.

    ``f`` must be vectorized. An infinite upper limit is truncated where
    ``|f|`` is negligible against ``tol``; the domain is split into panels
    shorter than half an oscillation period before adaptive refinement.
    The result's error estimate is at most ``max(tol, rtol * |result|)`` or
    :class:`AccuracyError` is raised.
    """
    a, b = (float(domain[0]), float(domain[1]))
    if not np.isfinite(a):
        raise ValueError("lower limit must be finite")
    if not np.isfinite(b):
        b = _tail_cutoff(f, a, tol)
    width = 1.0 if xi == 0 else min(1.0, np.pi / abs(xi))
    edges = panel_edges(a, b, width, min_panels=8)
    integrand = lambda s: f(s) * np.exp(-1j * s * xi)
    value, err = adaptive_gl(integrand, a, b, tol, edges=edges, rtol=rtol)
    if err > max(tol, rtol * abs(value)):
        budget = max(tol, rtol * abs(value))
        raise AccuracyError(f"error estimate {err:.3g} exceeds budget {budget:.3g}", value, err)
    return (complex(value), err) if full_output else complex(value)
