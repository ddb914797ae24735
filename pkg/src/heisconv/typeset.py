"""Type-set geometry and numerical probes of the (1/p, 1/q) type set.

A point ``(ip, iq) = (1/p, 1/q)`` can only be of type for ``T`` if

* ``iq >= (2n+1) ip - 2n`` (tested by ``f_delta = chi_{B(2 delta)}``), and
* ``iq >= ip / (2n+1)`` (the same test on the adjoint, read through duality),

and ``p <= q`` by translation invariance. The scaling experiments measure
``||T f_delta||_{L^q(A_delta)} / ||f_delta||_p`` over a ladder of ``delta``
and fit its power of ``delta``; a negative exponent means the ratio blows up
and the point is outside the type set.
"""

import csv
import json
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.sparse import linalg as splinalg
from scipy.stats import qmc

from ._parallel import pool_map
from ._quadrature import gauss_legendre
from .convolve import Grid, QuadratureSpec, SampledField, ensure_resolved, eval_at_points, operator_matrix
from .errors import NumericError, ResolutionError
from .measures import eval_phase
from .spectral import fit_loglog

TOL = 1e-12


@dataclass(frozen=True)
class TypePoint:
    ip: float
    iq: float

    def __post_init__(self):
        for v in (self.ip, self.iq):
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"type coordinates must lie in [0, 1], got {v}")
        object.__setattr__(self, "ip", float(self.ip))
        object.__setattr__(self, "iq", float(self.iq))

    @property
    def p(self):
        return np.inf if self.ip == 0 else 1.0 / self.ip

    @property
    def q(self):
        return np.inf if self.iq == 0 else 1.0 / self.iq

    def dual(self):
        """``(1/p, 1/q) -> (1 - 1/q, 1 - 1/p)``."""
        return TypePoint(1.0 - self.iq, 1.0 - self.ip)

    def as_tuple(self):
        return (self.ip, self.iq)


@dataclass(frozen=True)
class Triangle:
    A: TypePoint
    B: TypePoint
    C: TypePoint

    def __post_init__(self):
        if abs(self.area) <= TOL:
            raise ValueError("degenerate triangle")

    @property
    def area(self):
        (ax, ay), (bx, by), (cx, cy) = self.A.as_tuple(), self.B.as_tuple(), self.C.as_tuple()
        return 0.5 * ((bx - ax) * (cy - ay) - (cx - ax) * (by - ay))


def thm1_vertex(n):
    if n < 1:
        raise ValueError("n must be >= 1")
    return TypePoint((2 * n + 1) / (2 * n + 2), 1 / (2 * n + 2))


def thm1_triangle(n):
    return Triangle(TypePoint(0, 0), TypePoint(1, 1), thm1_vertex(n))


def thm2_vertex(n, m):
    if n < 2 or m < 2:
        raise ValueError("need n >= 2 and m >= 2")
    d = 2 * (1 + m * n)
    return TypePoint((d - m) / d, m / d)


def thm2_triangle(n, m):
    return Triangle(TypePoint(0, 0), TypePoint(1, 1), thm2_vertex(n, m))


def contains(tri, pt, tol=TOL):
    """Closed-triangle membership by barycentric coordinates."""
    (ax, ay), (bx, by), (cx, cy) = tri.A.as_tuple(), tri.B.as_tuple(), tri.C.as_tuple()
    det = (by - cy) * (ax - cx) + (cx - bx) * (ay - cy)
    l1 = ((by - cy) * (pt.ip - cx) + (cx - bx) * (pt.iq - cy)) / det
    l2 = ((cy - ay) * (pt.ip - cx) + (ax - cx) * (pt.iq - cy)) / det
    l3 = 1.0 - l1 - l2
    return bool(min(l1, l2, l3) >= -tol)


def predicted_exponent(pt, n):
    """``2n + 1/q - (2n+1)/p``."""
    return 2 * n + pt.iq - (2 * n + 1) * pt.ip


def predicted_dual_exponent(pt, n):
    """Exponent of the adjoint test run at the dual point: ``(2n+1)/q - 1/p``."""
    return predicted_exponent(pt.dual(), n)


# ------------------------------------------------------------ scaling ladder


@dataclass(frozen=True)
class ScalingLadder:
    """``deltas`` strictly decreasing in (0, 1).

    Each ``f_delta`` lives on its own grid with spacing
    ``delta / cells_per_delta`` (a scalar or one value per delta), unless a
    fixed ``spacing`` is given, in which case every delta must span at
    least 4 cells.
    """

    deltas: tuple = (2.0**-2, 2.0**-3, 2.0**-4, 2.0**-5)
    cells_per_delta: object = 8.0
    spacing: float = None

    def __post_init__(self):
        d = tuple(float(v) for v in self.deltas)
        if len(d) < 2 or any(not (0 < v < 1) for v in d) or any(b >= a for a, b in zip(d, d[1:])):
            raise ValueError("deltas must be >= 2 values, strictly decreasing in (0, 1)")
        object.__setattr__(self, "deltas", d)
        cpd = self.cells_per_delta
        cpd = tuple(float(v) for v in cpd) if np.ndim(cpd) else (float(cpd),) * len(d)
        if len(cpd) != len(d):
            raise ValueError("one refinement factor per delta")
        object.__setattr__(self, "cells_per_delta", cpd)

    def spacing_for(self, i):
        return self.spacing if self.spacing is not None else self.deltas[i] / self.cells_per_delta[i]

    def check(self, n):
        for i, d in enumerate(self.deltas):
            if d / self.spacing_for(i) < 4:
                raise ResolutionError(
                    f"delta={d:g} spans {d / self.spacing_for(i):.2f} cells at spacing {self.spacing_for(i):g}; need >= 4"
                )


@dataclass(frozen=True)
class ConvContext:
    """Discretization choices for the probes.

    ``quad`` is the w-rule used on ``A_delta``; ``disk_radial`` and
    ``disk_angular`` set the polar rule on the unit disk (n = 1; a
    scrambled Sobol set of ``disk_points`` is used for n >= 2);
    ``tau_nodes`` Gauss points sample ``|t -+ phi(x)| <= delta/4``.
    ``norm_grid`` and ``norm_quad`` define the discrete operator for the
    norm estimator.
    """

    quad: QuadratureSpec = field(default_factory=lambda: QuadratureSpec(32, interp_order=1))
    disk_radial: int = 8
    disk_angular: int = 16
    disk_points: int = 256
    tau_nodes: int = 4
    norm_grid: Grid = None
    norm_quad: QuadratureSpec = field(default_factory=lambda: QuadratureSpec(16, interp_order=1))
    norm_iterations: int = 60
    workers: int = 1

    def __post_init__(self):
        if self.tau_nodes < 4:
            raise ValueError("need at least 4 t-samples across A_delta")

    def grid_for_norm(self, n):
        return self.norm_grid or Grid.default(n, 0.5)


def disk_rule(n, ctx):
    """Points and weights on the closed unit ball of R^{2n}."""
    if n == 1:
        xr, wr = gauss_legendre(ctx.disk_radial)
        r = 0.5 * (xr + 1.0)
        wr = 0.5 * wr * r
        na = ctx.disk_angular
        ang = 2 * np.pi * (np.arange(na) + 0.5) / na
        pts = np.stack([np.outer(r, np.cos(ang)).ravel(), np.outer(r, np.sin(ang)).ravel()], axis=-1)
        return pts, np.repeat(wr, na) * (2 * np.pi / na)
    from math import factorial

    dim = 2 * n
    sob = qmc.Sobol(dim, scramble=True, seed=12345).random(4 * ctx.disk_points)
    cube = 2.0 * sob - 1.0
    pts = cube[np.sum(cube**2, axis=1) <= 1.0][: ctx.disk_points]
    vol = np.pi**n / factorial(n)
    return pts, np.full(pts.shape[0], vol / pts.shape[0])


def f_delta(n, delta, spacing, margin=2):
    """``chi_{B(2 delta)}`` sampled on a cube grid just covering the ball."""
    cells = int(np.ceil(2 * delta / spacing)) + margin
    half = cells * spacing
    grid = Grid(n, (half,) * (2 * n + 1), (2 * cells + 1,) * (2 * n + 1))
    pts = grid.points()
    vals = (np.sum(pts**2, axis=1) <= (2 * delta) ** 2).astype(float)
    return SampledField(grid, vals)


@dataclass(frozen=True)
class LadderSamples:
    """``T f_delta`` (or ``T* f_delta``) on ``A_delta`` for every rung."""

    deltas: tuple
    values: tuple  # arrays of samples per delta
    weights: tuple  # quadrature weights on A_delta (sum = |D| delta / 2)
    f_counts: tuple  # number of grid nodes where f_delta = 1
    cell_volumes: tuple
    coverage: tuple
    adjoint: bool

    def ratio(self, i, pt):
        vals = np.abs(self.values[i])
        if pt.iq == 0:
            num = vals.max()
        else:
            num = np.sum(self.weights[i] * vals ** pt.q) ** pt.iq
        den = 1.0 if pt.ip == 0 else (self.f_counts[i] * self.cell_volumes[i]) ** pt.ip
        return num / den

    def infimum(self, n):
        return tuple(float(v.min()) / d ** (2 * n) for v, d in zip(self.values, self.deltas))


def ladder_samples(gm, ladder, ctx, adjoint=False):
    n = gm.n
    ladder.check(n)
    xd, wd = disk_rule(n, ctx)
    xt, wt = gauss_legendre(ctx.tau_nodes)
    sign = -1.0 if adjoint else 1.0
    out = {"values": [], "weights": [], "f_counts": [], "cell_volumes": [], "coverage": []}
    for i, delta in enumerate(ladder.deltas):
        h = ladder.spacing_for(i)
        f = f_delta(n, delta, h)
        ensure_resolved(f.grid, delta)
        tau = 0.25 * delta * xt
        x = np.repeat(xd, tau.size, axis=0)
        t = (sign * eval_phase(gm.phase, xd)[:, None] + tau[None, :]).ravel()
        vals, cov = eval_at_points(f, gm, ctx.quad, x, t, adjoint=adjoint, workers=ctx.workers)
        out["values"].append(vals.real)
        out["weights"].append(np.outer(wd, 0.25 * delta * wt).ravel())
        out["f_counts"].append(int(np.count_nonzero(f.values)))
        out["cell_volumes"].append(f.grid.cell_volume)
        out["coverage"].append(cov)
    return LadderSamples(ladder.deltas, *(tuple(out[k]) for k in ("values", "weights", "f_counts", "cell_volumes", "coverage")), adjoint)


@dataclass
class ScanResult:
    """Outcome of the probes at one type point.

    ``fitted``/``predicted`` refer to the direct test (exponent
    ``2n + 1/q - (2n+1)/p``); the ``*_dual`` fields to the adjoint test run
    at the dual point (exponent ``(2n+1)/q - 1/p``).
    """

    point: TypePoint
    fitted: float
    predicted: float
    norm_lb: float
    inside_thm1: bool
    inside_thm2: object = None  # None when Theorem 2 does not apply
    r2: float = float("nan")
    fitted_dual: float = float("nan")
    predicted_dual: float = float("nan")
    r2_dual: float = float("nan")
    infimum: float = float("nan")
    flags: tuple = ()
    error: str = ""
    outside_tol: float = 0.05  # margin below 0 that counts as blow-up

    @property
    def necessarily_outside(self):
        """Some probe shows the point cannot be of type."""
        above_diagonal = self.point.ip < self.point.iq - TOL
        tol = self.outside_tol
        return bool(above_diagonal or self.fitted < -tol or self.fitted_dual < -tol)


def _fit(samples, pt):
    ratios = [samples.ratio(i, pt) for i in range(len(samples.deltas))]
    slope, _, r2 = fit_loglog(samples.deltas, ratios)
    return slope, r2


def _result(pt, gm, primal, dual, norm_lb, outside_tol=0.05):
    n = gm.n
    fitted, r2 = _fit(primal, pt)
    res = ScanResult(
        point=pt,
        fitted=fitted,
        predicted=predicted_exponent(pt, n),
        norm_lb=norm_lb,
        inside_thm1=contains(thm1_triangle(n), pt),
        inside_thm2=_thm2_membership(gm, pt),
        r2=r2,
        infimum=min(primal.infimum(n)),
        outside_tol=outside_tol,
    )
    flags = []
    if r2 < 0.98:
        flags.append("low_r2")
    if dual is not None:
        res.fitted_dual, res.r2_dual = _fit(dual, pt.dual())
        res.predicted_dual = predicted_dual_exponent(pt, n)
        if res.r2_dual < 0.98:
            flags.append("low_r2_dual")
    if pt.ip < pt.iq - TOL:
        flags.append("p_gt_q")
    res.flags = tuple(flags)
    return res


def _thm2_membership(gm, pt):
    if gm.phase.kind != "power" or gm.n < 2 or gm.phase.m < 2:
        return None
    return contains(thm2_triangle(gm.n, gm.phase.m), pt)


def scaling_experiment(pt, gm, ladder, ctx=None, samples=None):
    """Direct test at ``pt``: fit of ``||T f_delta||_{L^q(A_delta)} / ||f_delta||_p``."""
    ctx = ctx or ConvContext()
    samples = samples or ladder_samples(gm, ladder, ctx)
    return _result(pt, gm, samples, None, float("nan"))


def dual_scaling_experiment(pt, gm, ladder, ctx=None, samples=None):
    """Adjoint test at the dual point of ``pt``.

    ``pt`` in the type set of ``T`` forces ``pt.dual()`` into the type set of
    ``T*``; the returned ``fitted``/``predicted`` are those of the adjoint
    experiment at ``pt.dual()``, i.e. predicted ``(2n+1)/q - 1/p``.
    """
    ctx = ctx or ConvContext()
    samples = samples or ladder_samples(gm, ladder, ctx, adjoint=True)
    d = pt.dual()
    fitted, r2 = _fit(samples, d)
    res = ScanResult(
        point=pt,
        fitted=fitted,
        predicted=predicted_dual_exponent(pt, gm.n),
        norm_lb=float("nan"),
        inside_thm1=contains(thm1_triangle(gm.n), pt),
        inside_thm2=_thm2_membership(gm, pt),
        r2=r2,
        infimum=min(samples.infimum(gm.n)),
    )
    res.flags = ("low_r2",) if r2 < 0.98 else ()
    return res


# ------------------------------------------------------ norm lower bound


@lru_cache(maxsize=4)
def _cached_matrix(grid, gm, quad):
    return operator_matrix(grid, gm, quad)


def _dual_map(v, r):
    return np.sign(v) * np.abs(v) ** (r - 1.0)


def pq_norm_lower_bound(pt, gm, ctx=None, iterations=None, full_output=False):
    """Lower bound on the discretized ``||T||_{p -> q}`` by nonlinear power iteration.

    Alternates ``y = M x``, ``x <- J_{p'}(M^T J_q(y))`` with the duality
    maps ``J_r(v) = sign(v) |v|^{r-1}``; every iterate gives the certified
    value ``||M x||_q / ||x||_p`` of the discrete operator and the running
    maximum is returned (non-decreasing by construction).
    """
    ctx = ctx or ConvContext()
    if not (0 < pt.ip < 1 and 0 < pt.iq < 1):
        raise ValueError("the estimator needs 1 < p, q < inf")
    iterations = iterations or ctx.norm_iterations
    grid = ctx.grid_for_norm(gm.n)
    M = _cached_matrix(grid, gm.scaled(1.0 / gm.weight), ctx.norm_quad) * gm.weight
    p, q = pt.p, pt.q
    pd = p / (p - 1.0)
    vol = grid.cell_volume
    scale = vol ** (1.0 / q - 1.0 / p)
    x = M.T @ np.ones(M.shape[0])
    best, history = 0.0, []
    for _ in range(iterations):
        x = x / np.linalg.norm(x, p)
        y = M @ x
        est = scale * np.linalg.norm(y, q)
        if not np.isfinite(est):
            raise NumericError("non-finite iterate in the norm estimator")
        best = max(best, est)
        history.append(best)
        z = M.T @ _dual_map(y, q)
        if not np.any(z):
            break
        x = _dual_map(z, pd)
    return (best, history) if full_output else best


def l2_norm_oracle(gm, ctx=None):
    """Largest singular value of the discrete operator (p = q = 2)."""
    ctx = ctx or ConvContext()
    grid = ctx.grid_for_norm(gm.n)
    M = _cached_matrix(grid, gm.scaled(1.0 / gm.weight), ctx.norm_quad) * gm.weight
    s = splinalg.svds(M, k=1, return_singular_vectors=False, random_state=0)
    return float(s[0])


# ----------------------------------------------------------------------- scan


def default_scan_points(steps=5):
    ax = np.linspace(0.0, 1.0, steps)
    return [TypePoint(a, b) for a in ax for b in ax]


def scan(points, gm, ladder, ctx=None, with_norm=True, outside_tol=0.05):
    """Run both scaling tests and the norm estimator at every point.

    The ladder samples are computed once and shared by all points; a
    failing point records its error message instead of aborting the scan.
    """
    ctx = ctx or ConvContext()
    primal = ladder_samples(gm, ladder, ctx)
    dual = ladder_samples(gm, ladder, ctx, adjoint=True)

    def one(pt):
        try:
            nb = float("nan")
            if with_norm and 0 < pt.ip < 1 and 0 < pt.iq < 1:
                nb = pq_norm_lower_bound(pt, gm, ctx)
            return _result(pt, gm, primal, dual, nb, outside_tol)
        except Exception as exc:  # aggregated, not raised
            nan = float("nan")
            return ScanResult(pt, nan, predicted_exponent(pt, gm.n), nan, contains(thm1_triangle(gm.n), pt), error=repr(exc))

    return pool_map(one, points, 1)


SCAN_COLUMNS = (
    "ip", "iq", "fitted", "predicted", "norm_lb", "inside_thm1", "inside_thm2", "r2",
    "fitted_dual", "predicted_dual", "r2_dual", "infimum", "outside", "flags", "error",
)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def scan_rows(results):
    for r in results:
        yield [
            _fmt(r.point.ip), _fmt(r.point.iq), _fmt(r.fitted), _fmt(r.predicted), _fmt(r.norm_lb),
            _fmt(r.inside_thm1), _fmt(r.inside_thm2), _fmt(r.r2), _fmt(r.fitted_dual),
            _fmt(r.predicted_dual), _fmt(r.r2_dual), _fmt(r.infimum), _fmt(r.necessarily_outside),
            ";".join(r.flags), r.error,
        ]


def write_scan_csv(results, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCAN_COLUMNS)
        w.writerows(scan_rows(results))


def scan_to_json(results):
    out = []
    for r in results:
        d = asdict(r)
        d["point"] = [r.point.ip, r.point.iq]
        d["necessarily_outside"] = r.necessarily_outside
        d["flags"] = list(r.flags)
        out.append(d)
    return json.loads(json.dumps(out, default=float, allow_nan=True))
