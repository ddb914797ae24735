"""Diagonal entries of the group Fourier transform of poliradial kernels.

For the quadratic phase ``sum a_j |w_j|^2`` the entries factor as

    mu(alpha, lam) = I_{1-z}(-lam) phi_N(lam) prod_j rho(alpha_j, lam, a_j)

with the radial factor

    rho(k, lam, a) = int_0^inf eta(r^2) e^{i lam a r^2} r L_k(|lam| r^2/2) e^{-|lam| r^2/4} dr
                   = |lam|^{-1} int_0^inf eta(2 s/|lam|) e^{2i sgn(lam) a s} L_k(s) e^{-s/2} ds.

The radial power phase ``|w|^{2m}`` gives the entries ``upsilon(k, lam)``
and the oscillatory factor ``R_lam``. A uniform multiplicative constant
``(2 pi)^n`` of the group transform is left out everywhere; it cancels in
every bound ratio reported here.
"""

from dataclasses import dataclass
from math import factorial, gamma, pi, sqrt

import numpy as np
from scipy.optimize import minimize_scalar

from ._quadrature import composite_rule, panel_edges
from .errors import AccuracyError, DomainError
from .kernels import MollifierSpec, bump_hat_tabulated, mollifier_value
from .measures import CutoffSpec, bump_hat_l1, eval_bump
from .specfun import F_nk_hat, factorial_ratio, laguerre_all, rgamma_complex

#: the group transform carries this factor in front of every entry; not applied
def plancherel_constant(n):
    return (2.0 * pi) ** n


@dataclass(frozen=True)
class MultiIndex:
    alpha: tuple

    def __post_init__(self):
        alpha = tuple(int(a) for a in self.alpha)
        if not alpha or any(a < 0 for a in alpha):
            raise ValueError("multi-index entries must be non-negative integers")
        object.__setattr__(self, "alpha", alpha)

    @property
    def n(self):
        return len(self.alpha)

    @property
    def order(self):
        return sum(self.alpha)

    def check_bound(self, alpha_max):
        if max(self.alpha) > alpha_max:
            raise ValueError(f"multi-index {self.alpha} exceeds alpha_max={alpha_max}")
        return self


@dataclass(frozen=True)
class DiagonalEntry:
    index: object  # MultiIndex or int level k
    lam: float
    z: complex
    N: int
    value: complex
    error: float

    def __post_init__(self):
        if self.lam == 0:
            raise DomainError("entries are defined for lam != 0")
        if not self.error >= 0:
            raise ValueError("error estimate must be non-negative")


def I_one_minus_z(z, lam):
    """``I_{1-z}(lam) = 2^{(z-1)/2} / Gamma((1-z)/2) |lam|^{-z}`` (0 at z = 1)."""
    z = complex(z)
    lam = np.asarray(lam, dtype=float)
    return 2.0 ** ((z - 1) / 2) * rgamma_complex((1 - z) / 2) * np.abs(lam) ** (-z)


# ---------------------------------------------------------------- radial factor


def _radial_rule(lam, a, cutoff, kmax, refine):
    L = abs(lam)
    top = min(L * cutoff.outer / 2.0, 6.0 * kmax + 120.0)
    width = min(0.25, 1.0 / (abs(a) + 1.0), L * cutoff.width / (2.0 * cutoff.resolution))
    # the plateau edge is a breakpoint so the transition gets its own panels
    knee = L * cutoff.inner / 2.0
    if knee < top:
        edges = np.concatenate(
            [panel_edges(0.0, knee, width / refine), panel_edges(knee, top, width / refine)[1:]]
        )
    else:
        edges = panel_edges(0.0, top, width / refine)
    return composite_rule(edges, 16)


def _radial_direct(kmax, lam, a, cutoff, refine=1):
    s, w = _radial_rule(lam, a, cutoff, kmax, refine)
    sgn = np.sign(lam)
    g = w * eval_bump(cutoff, 2.0 * s / abs(lam)) * np.exp(2j * sgn * a * s - s / 2.0)
    return laguerre_all(kmax, 0, s) @ g / abs(lam)


def radial_factors(kmax, lam, a, cutoff=None):
    """``rho(k, lam, a)`` for ``k = 0..kmax`` and their error estimates.

    Composite Gauss-Legendre in ``s = |lam| r^2 / 2``; the error estimate
    is the change under halving every panel.
    """
    if lam == 0:
        raise DomainError("lam must be nonzero")
    cutoff = cutoff or CutoffSpec()
    coarse = _radial_direct(kmax, lam, a, cutoff, 1)
    fine = _radial_direct(kmax, lam, a, cutoff, 2)
    return fine, np.abs(fine - coarse)


def _radial_convolution(kmax, lam, a, cutoff):
    """``(2 pi |lam|)^{-1} int F_{1,k}^(xi0 - 2v/|lam|) eta^(v) dv`` with ``xi0 = -2 sgn(lam) a``."""
    L = abs(lam)
    xi0 = -2.0 * np.sign(lam) * a
    span = 700.0 / cutoff.width
    width = min(0.1, L / (2.0 * kmax + 2.0))
    v, w = composite_rule(panel_edges(-span, span, width), 16)
    weights = w * bump_hat_tabulated(cutoff, v)
    xi = xi0 - 2.0 * v / L
    out = np.empty(kmax + 1, dtype=complex)
    for k in range(kmax + 1):
        out[k] = F_nk_hat(1, k, xi) @ weights
    return out / (2.0 * pi * L)


def radial_factor(k, lam, a, cutoff=None, method="direct", full_output=False):
    cutoff = cutoff or CutoffSpec()
    if lam == 0:
        raise DomainError("lam must be nonzero")
    if method == "direct":
        vals, errs = radial_factors(k, lam, a, cutoff)
        value, err = vals[k], float(errs[k])
    elif method == "convolution":
        value = _radial_convolution(k, lam, a, cutoff)[k]
        err = float("nan")
    else:
        raise ValueError(f"unknown method {method!r}")
    return (complex(value), err) if full_output else complex(value)


def radial_factor_bound(lam, cutoff=None):
    """``|lam|^{-1} ||F_k^||_inf ||eta^||_1`` with ``||F_{1,k}^||_inf = 2``."""
    return 2.0 * bump_hat_l1(cutoff or CutoffSpec()) / abs(lam)


# ------------------------------------------------------------------- mu entries


def mu_prefactor(z, N, lam, mollifier=None):
    mollifier = mollifier or MollifierSpec()
    return I_one_minus_z(z, -lam) * mollifier_value(mollifier, N, lam)


def mu_entry(z, N, alpha, lam, gm, mollifier=None):
    if gm.phase.kind != "quadratic":
        raise ValueError("mu entries need a quadratic phase")
    alpha = alpha if isinstance(alpha, MultiIndex) else MultiIndex(alpha)
    if alpha.n != gm.n:
        raise ValueError("multi-index length must equal n")
    if lam == 0:
        raise DomainError("lam must be nonzero")
    pref = complex(mu_prefactor(z, N, lam, mollifier))
    factors, errs = [], []
    for k, a, c in zip(alpha.alpha, gm.phase.a, gm.cutoffs):
        vals, err = radial_factors(k, lam, a, c)
        factors.append(vals[k])
        errs.append(err[k])
    prod = np.prod(factors)
    # first-order propagation of the per-factor errors
    err = sum(e * abs(np.prod(factors[:j] + factors[j + 1 :])) for j, e in enumerate(errs))
    return DiagonalEntry(alpha, float(lam), complex(z), int(N), gm.weight * pref * prod, gm.weight * abs(pref) * err)


def mu_bound(z, gm, mollifier=None):
    """``2^n |Gamma((1-z)/2)|^{-1} ||H||_inf prod ||eta_j^||_1``."""
    mollifier = mollifier or MollifierSpec()
    out = 2.0**gm.n * abs(rgamma_complex((1 - complex(z)) / 2)) * mollifier.H_sup
    for c in gm.cutoffs:
        out *= bump_hat_l1(c)
    return gm.weight * out


def signed_log_grid(lo, hi, per_decade):
    count = int(round(np.log10(hi / lo) * per_decade)) + 1
    pos = np.geomspace(lo, hi, count)
    return np.concatenate([-pos[::-1], pos])


def _multi_indices(n, order_max):
    if n == 1:
        return [(k,) for k in range(order_max + 1)]
    return [(k,) + rest for k in range(order_max + 1) for rest in _multi_indices(n - 1, order_max - k)]


def mu_bound_sweep(gm, zs, Ns, lams, order_max, mollifier=None, pool_map=map):
    """Largest ``|mu| / bound`` over ``|alpha| <= order_max`` for each (z, N, lam).

    Returns rows ``(z, N, alpha, lam, |mu|, bound, ratio)`` where ``alpha``
    is the maximizing multi-index.
    """
    mollifier = mollifier or MollifierSpec()
    indices = np.array(_multi_indices(gm.n, order_max))

    def per_lambda(lam):
        prod = np.ones(len(indices), dtype=complex)
        for j, (a, c) in enumerate(zip(gm.phase.a, gm.cutoffs)):
            vals, _ = radial_factors(order_max, lam, a, c)
            prod *= vals[indices[:, j]]
        best = int(np.argmax(np.abs(prod)))
        return best, abs(prod[best])

    peaks = list(pool_map(per_lambda, list(lams)))
    rows = []
    for z in zs:
        bound = mu_bound(z, gm, mollifier)
        for N in Ns:
            for lam, (best, peak) in zip(lams, peaks):
                mag = gm.weight * abs(complex(mu_prefactor(z, N, lam, mollifier))) * peak
                rows.append((complex(z), int(N), tuple(int(v) for v in indices[best]), float(lam), mag, bound, mag / bound))
    return rows


# -------------------------------------------------------------- upsilon entries


def _upsilon_integral(k, lam, m, n, cutoff, refine=1):
    """``(1/2) int_0^outer eta(u) L_k^{n-1}(|lam| u/2) e^{-|lam| u/4} e^{i lam u^m} u^{n-1} du``."""
    L = abs(lam)
    top = min(cutoff.outer, 2.0 * (6.0 * k + 120.0 + 4.0 * n) / L)
    # panels uniform both in the oscillation phase lam u^m and in s = |lam| u / 2
    phase_step = (pi / 2) / refine
    count = int(np.ceil(L * top**m / phase_step))
    phase_cuts = (np.arange(1, count) * phase_step / L) ** (1.0 / m)
    lin_width = min(0.5 / L, cutoff.width / cutoff.resolution, 0.25) / refine
    edges = np.union1d(np.union1d(panel_edges(0.0, top, lin_width), phase_cuts[phase_cuts < top]), [min(cutoff.inner, top)])
    u, w = composite_rule(edges, 16)
    g = eval_bump(cutoff, u) * np.exp(-L * u / 4.0 + 1j * lam * u**m) * u ** (n - 1)
    lag = laguerre_all(k, n - 1, L * u / 2.0)[k]
    return 0.5 * np.sum(w * g * lag)


def upsilon_entry(z, N, k, lam, m, n, cutoff=None, mollifier=None):
    """``k!/(k+n-1)! I_{1-z}(-lam) phi_N(lam) int eta_0(s^2) L_k^{n-1} ... s^{2n-1} ds``."""
    if lam == 0:
        raise DomainError("lam must be nonzero")
    if k < 0 or m < 1 or n < 1:
        raise ValueError("need k >= 0, m >= 1, n >= 1")
    cutoff = cutoff or CutoffSpec()
    coarse = _upsilon_integral(k, lam, m, n, cutoff, 1)
    fine = _upsilon_integral(k, lam, m, n, cutoff, 2)
    scale = complex(mu_prefactor(z, N, lam, mollifier)) / factorial_ratio(k, n)
    return DiagonalEntry(int(k), float(lam), complex(z), int(N), scale * fine, abs(scale) * abs(fine - coarse))


def upsilon_strip_edge(n, m):
    """The real part ``-(n + (1-m)/m)`` where the L2 bound is taken."""
    return -(n + (1.0 - m) / m)


def vdc_constant(m):
    """Explicit van der Corput constant for ``sup |R_lam^| <= C_m |lam|^{(m-1)/m}``.

    The m-th derivative of the phase is ``2^m m! |lam|^{1-m}``; the
    van der Corput lemma with constant ``5 2^{m-1} - 2`` then gives
    ``C_m = (5 2^{m-1} - 2) (2^m m!)^{-1/m}``.
    """
    return (5.0 * 2 ** (m - 1) - 2.0) * (2.0**m * factorial(m)) ** (-1.0 / m)


def laguerre_hat_l1(n):
    """``int (1/4 + xi^2)^{-n/2} d xi`` (finite for n >= 2)."""
    if n < 2:
        raise DomainError("the integral diverges for n = 1")
    return sqrt(pi) * gamma((n - 1) / 2) / gamma(n / 2) * 2.0 ** (n - 1)


def upsilon_bound(z, m, n, cutoff=None, mollifier=None):
    """``C_m 2^{n-1} |Gamma((1-z)/2)|^{-1} ||H||_inf K_n ||eta_0^||_1``."""
    mollifier = mollifier or MollifierSpec()
    cutoff = cutoff or CutoffSpec()
    return (
        vdc_constant(m)
        * 2.0 ** (n - 1)
        * abs(rgamma_complex((1 - complex(z)) / 2))
        * mollifier.H_sup
        * laguerre_hat_l1(n)
        * bump_hat_l1(cutoff)
    )


def upsilon_bound_sweep(m, n, zs, Ns, ks, lams, cutoff=None, mollifier=None, pool_map=map):
    """Rows ``(z, N, k, lam, |upsilon|, bound, ratio)``."""
    cutoff = cutoff or CutoffSpec()
    mollifier = mollifier or MollifierSpec()
    pairs = [(k, lam) for k in ks for lam in lams]
    ints = list(pool_map(lambda p: _upsilon_integral(p[0], p[1], m, n, cutoff, 2) / factorial_ratio(p[0], n), pairs))
    rows = []
    for z in zs:
        bound = upsilon_bound(z, m, n, cutoff, mollifier)
        for N in Ns:
            for (k, lam), val in zip(pairs, ints):
                mag = abs(complex(mu_prefactor(z, N, lam, mollifier)) * val)
                rows.append((complex(z), int(N), int(k), float(lam), mag, bound, mag / bound))
    return rows


# ---------------------------------------------------------------- R_lambda hat


def _r_rule(lam, m, xi_max, refine=1, breaks=()):
    L = abs(lam)
    rate = L * (m * 2**m + xi_max)
    # one oscillation per 16-point panel
    width = min(1.0 / 16, 2 * pi / max(rate, 1e-300)) / refine
    edges = panel_edges(0.0, 1.0, width)
    if breaks:
        edges = np.union1d(edges, [b for b in breaks if 0 < b < 1])
    return composite_rule(edges, 16)


def _stationary_point(lam, m, xi):
    s = np.sign(lam)
    if s * xi <= 0:
        return None
    return (s * xi / (m * 2**m)) ** (1.0 / (m - 1))


def R_lambda_hat(lam, m, xi, full_output=False):
    """``int_0^{|lam|} exp(i (2^m sgn(lam) |lam|^{1-m} s^m - xi s)) ds``.

    Written as ``|lam| int_0^1 exp(i |lam| (2^m sgn t^m - xi t)) dt``; panels
    carry at most one oscillation each and a scalar ``xi`` adds its
    stationary point as a breakpoint. Vectorized over ``xi``; each chunk of
    ``xi`` values gets a rule sized for its largest ``|xi|``.
    """
    if lam == 0:
        raise DomainError("lam must be nonzero")
    if m < 2:
        raise ValueError("m must be >= 2")
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    s, L = np.sign(lam), abs(lam)
    breaks = ()
    if xi_arr.size == 1:
        tstar = _stationary_point(lam, m, float(xi_arr[0]))
        breaks = () if tstar is None else (tstar,)

    def run(refine):
        out = np.empty(xi_arr.shape, dtype=complex)
        order = np.argsort(np.abs(xi_arr))
        chunk = 64
        for i in range(0, order.size, chunk):
            sel = order[i : i + chunk]
            t, w = _r_rule(lam, m, float(np.abs(xi_arr[sel]).max()), refine, breaks)
            ph = L * (2.0**m * s * t[None, :] ** m - xi_arr[sel, None] * t[None, :])
            out[sel] = L * (np.exp(1j * ph) @ w)
        return out

    val = run(2 if full_output else 1)
    if full_output:
        err = np.abs(val - run(1))
        return (val[0], float(err[0])) if np.ndim(xi) == 0 else (val, err)
    return val[0] if np.ndim(xi) == 0 else val


def R_lambda_sup(lam, m, refine_top=3):
    """``sup_xi |R_lam^(xi)|``: grid search, then refinement of the top maxima.

    Outside ``s xi in [0, m 2^m]`` there is no stationary point and the
    integral is small, so the search covers ``[-4, m 2^m + 4]`` (signed).
    The step is fine near ``xi = 0``, where the stationary point meets the
    degenerate endpoint, and coarser elsewhere.
    """
    s = np.sign(lam)
    L = abs(lam)
    fine = 0.25 * L ** (-(m - 1) / m)
    near = min(4.0, 2.0 * m * 2**m * L ** (-(m - 1) / m))
    coarse = max(fine, 0.05)
    grid = np.unique(np.concatenate([
        np.arange(-near, near + fine, fine),
        np.arange(-4.0, m * 2**m + 4.0 + coarse, coarse),
    ]))
    grid = np.sort(s * grid)
    mags = np.abs(R_lambda_hat(lam, m, grid))
    best = float(mags.max())
    interior = np.flatnonzero((mags[1:-1] >= mags[:-2]) & (mags[1:-1] >= mags[2:])) + 1
    for idx in interior[np.argsort(mags[interior])[::-1][:refine_top]]:
        a, b = sorted((grid[idx - 1], grid[idx + 1]))
        res = minimize_scalar(
            lambda x: -abs(R_lambda_hat(lam, m, x)), bounds=(a, b), method="bounded", options={"xatol": 1e-3 * fine}
        )
        best = max(best, -float(res.fun))
    return best


def fit_loglog(x, y):
    """Least-squares slope, intercept and R^2 of log y against log x."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / tot if tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)


@dataclass(frozen=True)
class VdcResult:
    m: int
    lams: tuple
    sups: tuple
    slope: float
    r2: float
    ratios: tuple  # sup / |lam|^{(m-1)/m}
    ratio_trend: float  # log-log slope of the ratio over the last decade

    @property
    def expected(self):
        return (self.m - 1) / self.m

    def passed(self, tol=0.05):
        return abs(self.slope - self.expected) <= tol and self.ratio_trend <= tol


def vdc_envelope(m, lams=None, pool_map=map):
    lams = np.geomspace(1.0, 1e3, 13) if lams is None else np.asarray(lams, dtype=float)
    sups = np.array(list(pool_map(lambda lam: R_lambda_sup(lam, m), list(lams))))
    slope, _, r2 = fit_loglog(lams, sups)
    ratios = sups / lams ** ((m - 1) / m)
    tail = lams >= lams.max() / 10
    trend = fit_loglog(lams[tail], ratios[tail])[0] if tail.sum() >= 2 else 0.0
    return VdcResult(m, tuple(lams), tuple(sups), slope, r2, tuple(ratios), trend)


# ------------------------------------------------------------------- Plancherel


@dataclass(frozen=True)
class PoliradialKernel:
    """A kernel ``K(|w|, t)`` on H^1 given by a vectorized function of (r, t).

    It is assumed negligible outside ``r <= r_max`` and ``|t| <= t_max``.
    """

    func: object
    r_max: float
    t_max: float
    scale: float = 1.0
    r_panels: int = 96
    t_panels: int = 96

    def __call__(self, r, t):
        return self.scale * self.func(r, t)

    def scaled(self, c):
        return PoliradialKernel(self.func, self.r_max, self.t_max, self.scale * c, self.r_panels, self.t_panels)


@dataclass(frozen=True)
class PlancherelResult:
    ratio: float
    l2_squared: float
    entry_sum: float
    alpha_max_used: int
    lam_range: tuple
    tail_fraction: float


def _entries_at(kernel, r, wr, t, wt, Kmat, lam, tol, alpha_cap):
    """``|lam| sum_alpha |mu(alpha, lam)|^2`` with adaptive alpha truncation."""
    Kt = Kmat @ (wt * np.exp(1j * lam * t))
    sig = abs(lam) * r**2 / 2.0
    base = wr * Kt * r * np.exp(-sig / 2.0)
    A = 64
    while True:
        mu = laguerre_all(A, 0, sig) @ base
        sq = np.abs(mu) ** 2
        total = sq.sum()
        tail = sq[A // 2 :].sum()
        if total == 0 or tail <= tol * total:
            return abs(lam) * total, A, tail / total if total else 0.0
        if 2 * A > alpha_cap:
            raise AccuracyError(f"alpha truncation not converged at lam={lam:g} (alpha_max={A})")
        A *= 2


def plancherel_ratio(kernel, lam_lo=1e-2, lam_hi=None, tol=1e-4, alpha_cap=16384, lam_panels=24):
    """``||K||_2^2 / int sum_alpha |mu(alpha, lam)|^2 |lam| d lam`` for n = 1.

    ``mu(alpha, lam) = int K~(r, lam) r L_alpha(|lam| r^2/2) e^{-|lam| r^2/4} dr``
    with ``K~(r, lam) = int K(r, t) e^{i lam t} dt``. The lam-integral uses
    log-spaced Gauss panels on ``[lam_lo, lam_hi]`` (both signs) and the
    value at ``lam_lo`` on ``|lam| < lam_lo``; ``alpha`` is extended until
    the upper half of the terms carries less than ``tol`` of the sum.
    """
    r, wr = composite_rule(np.linspace(0.0, kernel.r_max, kernel.r_panels + 1), 16)
    t, wt = composite_rule(np.linspace(-kernel.t_max, kernel.t_max, kernel.t_panels + 1), 16)
    Kmat = kernel(r[:, None], t[None, :])
    l2 = 2.0 * pi * float(np.sum(wr * r * (np.abs(Kmat) ** 2 @ wt)))

    def density(lam):
        return _entries_at(kernel, r, wr, t, wt, Kmat, lam, tol, alpha_cap)

    if lam_hi is None:
        ref = density(1.0)[0]
        lam_hi = 8.0
        while density(lam_hi)[0] + density(-lam_hi)[0] > 1e-10 * ref:
            lam_hi *= 2.0
            if lam_hi > 1e6:
                raise AccuracyError("lam integrand does not decay")
    nodes, weights = composite_rule(np.geomspace(lam_lo, lam_hi, lam_panels + 1), 8)
    total, amax, tails = 0.0, 0, []
    for sign in (1.0, -1.0):
        vals = []
        for lam in sign * nodes:
            val, A, tail = density(lam)
            vals.append(val)
            amax, tails = max(amax, A), tails + [tail]
        head, A, _ = density(sign * lam_lo)
        total += float(np.dot(weights, vals)) + lam_lo * head
    return PlancherelResult(l2 / total, l2, total, amax, (lam_lo, lam_hi), max(tails))
