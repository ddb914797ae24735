"""The graph measure nu: phase, smooth cutoffs and their Fourier data.

The measure lives on the graph ``{(w, phi(w))}`` of either a quadratic
phase ``sum_j a_j |w_j|^2`` or a radial power ``|w|^{2m}``, with density
``eta(w)``. The cutoffs are built from the classical smooth step

    psi(u) = exp(-1/u) (u > 0),    g(u) = psi(u) / (psi(u) + psi(1 - u)),

as ``eta(t) = 1`` on ``|t| <= inner``, ``g((outer - |t|) / (outer - inner))``
on the transition and ``0`` beyond ``outer``. Fourier transforms use
``f^(xi) = int f(s) exp(-i s xi) ds`` everywhere in the package.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from ._quadrature import composite_rule, gauss_legendre
from .errors import AccuracyError, DimensionError


def smooth_step(u):
    """``g(u)``: 0 for u <= 0, 1 for u >= 1, C-infinity in between."""
    u = np.asarray(u, dtype=float)
    inside = (u > 0) & (u < 1)
    uc = np.where(inside, u, 0.5)
    a = np.exp(-1.0 / uc)
    b = np.exp(-1.0 / (1.0 - uc))
    return np.where(inside, a / (a + b), np.where(u >= 1, 1.0, 0.0))


def smooth_step_derivative(u):
    u = np.asarray(u, dtype=float)
    inside = (u > 0) & (u < 1)
    uc = np.where(inside, u, 0.5)
    a = np.exp(-1.0 / uc)
    b = np.exp(-1.0 / (1.0 - uc))
    num = a / uc**2 * b + a * b / (1.0 - uc) ** 2
    return np.where(inside, num / (a + b) ** 2, 0.0)


@dataclass(frozen=True)
class CutoffSpec:
    """Even bump equal to 1 on ``[-inner, inner]``, supported in ``(-outer, outer)``.

    ``resolution`` is the Gauss-Legendre order used between consecutive
    zeros of the Fourier transform when computing its L1 norm.
    """

    inner: float = 1.0
    outer: float = 2.0
    resolution: int = 20

    def __post_init__(self):
        if not (0 < self.inner < self.outer):
            raise ValueError("need 0 < inner < outer")
        if self.resolution < 2:
            raise ValueError("resolution must be >= 2")

    @property
    def width(self):
        return self.outer - self.inner


def eval_bump(c, t):
    t = np.abs(np.asarray(t, dtype=float))
    return np.where(t <= c.inner, 1.0, smooth_step((c.outer - t) / c.width))


@lru_cache(maxsize=64)
def _transition_rule(c, panels):
    """Nodes on the transition band with weights for eta and for -eta'."""
    t, wt = composite_rule(np.linspace(c.inner, c.outer, panels + 1), 16)
    u = (c.outer - t) / c.width
    return t, smooth_step(u) * wt, smooth_step_derivative(u) * wt / c.width


def bump_hat(c, v):
    """Fourier transform of the (real, even) bump at real frequencies ``v``."""
    v = np.abs(np.atleast_1d(np.asarray(v, dtype=float)))
    vmax = float(v.max()) if v.size else 0.0
    # fixed rule up to |v| = 1000/width so values are reproducible pointwise
    panels = int(np.ceil(c.width * max(vmax, 1000.0 / c.width) / 8.0))
    t, ramp, slope = _transition_rule(c, panels)
    out = np.empty_like(v)
    small = v <= 1.0
    if np.any(small):
        vs = v[small]
        out[small] = 2.0 * (c.inner * np.sinc(vs * c.inner / np.pi) + np.cos(np.outer(vs, t)) @ ramp)
    big = ~small
    if np.any(big):
        # integrated by parts: only the transition band contributes, no cancellation
        vb = v[big]
        res = np.empty_like(vb)
        for i in range(0, vb.size, 1024):
            chunk = vb[i : i + 1024]
            res[i : i + 1024] = 2.0 * (np.sin(np.outer(chunk, t)) @ slope) / chunk
        out[big] = res
    return out


def _abs_integral_between_zeros(f, edges, order):
    x, w = gauss_legendre(order)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    pts = 0.5 * (lo + hi)[:, None] + half[:, None] * x
    vals = np.abs(f(pts.ravel())).reshape(pts.shape)
    return float(np.sum(half * (vals @ w)))


@lru_cache(maxsize=64)
def bump_hat_l1_estimate(c):
    """``(||eta^||_1, error_bound)`` for the cutoff ``c``.

    |eta^| is integrated exactly between consecutive sign changes with
    ``c.resolution`` Gauss-Legendre nodes; the error bound is the gap to
    the half-order rule plus the tail beyond the truncation frequency.
    """
    f = lambda v: bump_hat(c, v)
    f1 = lambda s: float(f(np.array([s]))[0])
    vmax = 750.0 / c.width
    step = np.pi / (32.0 * c.outer)
    grid = np.arange(0.0, vmax + step, step)
    vals = f(grid)
    floor = 1e-13 * abs(vals[0])
    live = np.nonzero(np.abs(vals) > floor)[0]
    cut = grid[live[-1] + 1] if live.size and live[-1] + 1 < grid.size else vmax
    mask = grid <= cut
    gv, fv = grid[mask], vals[mask]
    sign = np.where(np.abs(fv) < 1e-15 * abs(fv[0]), 0.0, np.sign(fv))
    roots = list(gv[1:][sign[1:] == 0])  # grid points sitting on a zero
    for i in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
        roots.append(brentq(f1, gv[i], gv[i + 1], xtol=1e-14))
    roots.sort()
    edges = np.array([0.0, *roots, cut])
    fine = _abs_integral_between_zeros(f, edges, c.resolution)
    coarse = _abs_integral_between_zeros(f, edges, max(2, c.resolution // 2))
    tail_grid = np.linspace(cut, 2 * cut, 2001)
    tail = float(np.trapezoid(np.abs(f(tail_grid)), tail_grid))
    return 2.0 * fine, 2.0 * (abs(fine - coarse) + tail)


def bump_hat_l1(c, tol=1e-6):
    value, err = bump_hat_l1_estimate(c)
    if err > tol * value:
        raise AccuracyError(f"||eta^||_1 error {err:.3g} above tolerance", value, err)
    return value


@dataclass(frozen=True)
class PhaseSpec:
    """Either ``sum_j a_j |w_j|^2`` (kind='quadratic') or ``|w|^{2m}`` (kind='power')."""

    kind: str
    a: tuple = ()
    m: int = 1

    def __post_init__(self):
        if self.kind == "quadratic":
            a = tuple(float(v) for v in self.a)
            if not a or not all(np.isfinite(a)):
                raise ValueError("quadratic phase needs finite coefficients a_j")
            object.__setattr__(self, "a", a)
        elif self.kind == "power":
            if int(self.m) != self.m or self.m < 1:
                raise ValueError("power phase needs an integer m >= 1")
            object.__setattr__(self, "m", int(self.m))
        else:
            raise ValueError(f"unknown phase kind {self.kind!r}")

    @classmethod
    def quadratic(cls, a):
        return cls("quadratic", tuple(a))

    @classmethod
    def power(cls, m):
        return cls("power", (), int(m))


def _pair_moduli(w):
    """``|w_j|^2 = w_j^2 + w_{n+j}^2`` along the last axis."""
    n = w.shape[-1] // 2
    return w[..., :n] ** 2 + w[..., n:] ** 2


def eval_phase(phase, w):
    w = np.asarray(w, dtype=float)
    if w.shape[-1] % 2:
        raise DimensionError(f"w must have even length, got {w.shape[-1]}")
    if phase.kind == "quadratic":
        if w.shape[-1] != 2 * len(phase.a):
            raise DimensionError(f"phase has n={len(phase.a)} but w has length {w.shape[-1]}")
        return _pair_moduli(w) @ np.asarray(phase.a)
    return np.sum(w**2, axis=-1) ** phase.m


def eval_phase_gradient(phase, w):
    w = np.asarray(w, dtype=float)
    if phase.kind == "quadratic":
        a = np.asarray(phase.a)
        return 2.0 * w * np.concatenate([a, a])
    r2 = np.sum(w**2, axis=-1, keepdims=True)
    return 2.0 * phase.m * r2 ** (phase.m - 1) * w


@dataclass(frozen=True)
class GraphMeasure:
    """The measure ``E -> int chi_E(w, phi(w)) weight * eta(w) dw`` on H^n.

    Quadratic phases use a product of per-factor cutoffs ``eta_j(|w_j|^2)``
    (one cutoff reused for every factor if a single one is given); power
    phases use one radial cutoff ``eta_0(|w|^2)``.
    """

    n: int
    phase: PhaseSpec
    cutoffs: tuple = field(default_factory=lambda: (CutoffSpec(),))
    weight: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.phase.kind == "quadratic" and len(self.phase.a) != self.n:
            raise DimensionError(f"quadratic phase has {len(self.phase.a)} coefficients, n={self.n}")
        cutoffs = tuple(self.cutoffs)
        if self.phase.kind == "quadratic" and len(cutoffs) == 1:
            cutoffs = cutoffs * self.n
        expected = self.n if self.phase.kind == "quadratic" else 1
        if len(cutoffs) != expected:
            raise ValueError(f"expected {expected} cutoffs, got {len(cutoffs)}")
        object.__setattr__(self, "cutoffs", cutoffs)

    @property
    def support_halfwidth(self):
        """Every coordinate of a point in supp(eta) is below this in modulus."""
        return float(np.sqrt(max(c.outer for c in self.cutoffs)))

    def scaled(self, factor):
        return GraphMeasure(self.n, self.phase, self.cutoffs, self.weight * factor)

    def to_config(self):
        out = {"n": self.n, "phase.kind": self.phase.kind}
        if self.phase.kind == "quadratic":
            out["phase.a"] = list(self.phase.a)
        else:
            out["phase.m"] = self.phase.m
        return out

    @classmethod
    def from_config(cls, cfg):
        kind = cfg.get("phase.kind", "quadratic")
        n = int(cfg["n"])
        if kind == "quadratic":
            a = cfg.get("phase.a", [1.0] * n)
            phase = PhaseSpec.quadratic(a)
        else:
            phase = PhaseSpec.power(cfg.get("phase.m", 2))
        return cls(n, phase)


def eval_density(gm, w):
    w = np.asarray(w, dtype=float)
    if w.shape[-1] != 2 * gm.n:
        raise DimensionError(f"w must have length {2 * gm.n}, got {w.shape[-1]}")
    if gm.phase.kind == "power":
        return gm.weight * eval_bump(gm.cutoffs[0], np.sum(w**2, axis=-1))
    mod = _pair_moduli(w)
    out = np.full(w.shape[:-1], gm.weight, dtype=float)
    for j, c in enumerate(gm.cutoffs):
        out = out * eval_bump(c, mod[..., j])
    return out


def phase_gradient_sup(gm, samples=64):
    """Numerical sup of |grad phi| over supp(eta) (tensor grid sampling)."""
    h = gm.support_halfwidth
    axis = np.linspace(-h, h, samples)
    if gm.n == 1:
        pts = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
    else:
        rng = np.random.default_rng(0)
        pts = rng.uniform(-h, h, size=(samples**2, 2 * gm.n))
    keep = eval_density(gm.scaled(1.0 / gm.weight), pts) > 0
    grad = eval_phase_gradient(gm.phase, pts[keep])
    return float(np.max(np.linalg.norm(grad, axis=-1)))
