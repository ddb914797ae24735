"""Right convolution with a graph measure on grid-sampled functions.

``T f(x, t) = int f(x - w, t - phi(w) - W(x, w)/2) eta(w) dw`` and its
adjoint ``T* g(x, t) = int g(x + y, t + phi(y) + W(x, y)/2) eta(y) dy``.
Fields live on a node-centred rectangular grid over a box in R^{2n} x R,
are extended by zero outside it and read off-grid with spline
interpolation (linear or cubic).
"""

import json
import os
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np
from scipy import ndimage, sparse

from ._parallel import pool_map
from ._quadrature import gauss_legendre
from .errors import DimensionError, ResolutionError
from .hgroup import HPoint, symplectic_form_arrays
from .measures import eval_density, eval_phase


@dataclass(frozen=True)
class Grid:
    """Node-centred grid; axis ``k`` holds ``shape[k]`` points spanning
    ``center[k] +- half_extents[k]``. The last axis is the central one."""

    n: int
    half_extents: tuple
    shape: tuple
    center: tuple = None
    max_points: ClassVar[int] = 40_000_000

    def __post_init__(self):
        dim = 2 * self.n + 1
        he = tuple(float(v) for v in self.half_extents)
        shape = tuple(int(v) for v in self.shape)
        center = (0.0,) * dim if self.center is None else tuple(float(v) for v in self.center)
        if len(he) != dim or len(shape) != dim or len(center) != dim:
            raise DimensionError(f"grid for n={self.n} needs {dim} axes")
        if any(v <= 0 for v in he) or any(s < 2 for s in shape):
            raise ValueError("half extents must be positive and axes need >= 2 points")
        if int(np.prod(shape, dtype=float)) > self.max_points:
            raise ValueError(f"grid has {np.prod(shape, dtype=float):.3g} points, budget {self.max_points}")
        object.__setattr__(self, "half_extents", he)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "center", center)

    @classmethod
    def from_spacing(cls, n, half_extents, spacing, center=None):
        he = np.broadcast_to(np.asarray(half_extents, dtype=float), (2 * n + 1,))
        sp = np.broadcast_to(np.asarray(spacing, dtype=float), (2 * n + 1,))
        shape = tuple(int(v) for v in np.round(2 * he / sp).astype(int) + 1)
        return cls(n, tuple(he), shape, center)

    @classmethod
    def default(cls, n=1, spacing=0.25):
        """Box ``[-4, 4]^{2n} x [-8, 8]``."""
        return cls.from_spacing(n, (4.0,) * (2 * n) + (8.0,), spacing)

    @property
    def dim(self):
        return 2 * self.n + 1

    @property
    def spacing(self):
        return tuple(2 * h / (s - 1) for h, s in zip(self.half_extents, self.shape))

    @property
    def lower(self):
        return tuple(c - h for c, h in zip(self.center, self.half_extents))

    @property
    def upper(self):
        return tuple(c + h for c, h in zip(self.center, self.half_extents))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    @property
    def size(self):
        return int(np.prod(self.shape))

    def axes(self):
        return [np.linspace(lo, hi, s) for lo, hi, s in zip(self.lower, self.upper, self.shape)]

    def points(self):
        """All nodes as a ``(size, 2n+1)`` array in row-major order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def to_index(self, coords):
        coords = np.asarray(coords, dtype=float)
        return (coords - np.asarray(self.lower)) / np.asarray(self.spacing)

    def refined(self, factor=2):
        """Same box with the spacing divided by ``factor``."""
        shape = tuple((s - 1) * factor + 1 for s in self.shape)
        return Grid(self.n, self.half_extents, shape, self.center)

    def to_header(self):
        return {"n": self.n, "half_extents": list(self.half_extents), "shape": list(self.shape), "center": list(self.center)}


@dataclass
class SampledField:
    grid: Grid
    values: np.ndarray
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values)
        if not np.iscomplexobj(vals):
            vals = vals.astype(float)
        if vals.size != self.grid.size:
            raise DimensionError(f"{vals.size} values for a grid of {self.grid.size} points")
        vals = vals.reshape(self.grid.shape)
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        self.values = vals

    @classmethod
    def from_function(cls, grid, func):
        pts = grid.points()
        return cls(grid, func(pts[:, :-1], pts[:, -1]))

    def __add__(self, other):
        return SampledField(self.grid, self.values + other.values)

    def __mul__(self, c):
        return SampledField(self.grid, self.values * c)

    __rmul__ = __mul__


@dataclass(frozen=True)
class QuadratureSpec:
    """Rule for the w-integral and the interpolation order for off-grid reads.

    ``rule='tensor'``: ``nodes`` Gauss-Legendre points per axis (composite,
    at most 8 per panel) on the window where the integrand can be nonzero.
    ``rule='polar'`` (n = 1): ``nodes`` radial points times ``2 nodes``
    angles over the support disk.
    """

    nodes: int = 24
    rule: str = "tensor"
    interp_order: int = 3

    def __post_init__(self):
        if self.nodes < 8:
            raise ValueError("need at least 8 nodes per axis")
        if self.rule not in ("tensor", "polar"):
            raise ValueError(f"unknown rule {self.rule!r}")
        if self.interp_order not in (1, 3):
            raise ValueError("interpolation order must be 1 or 3")

    def base_rule(self):
        panels = max(1, self.nodes // 8)
        per = self.nodes // panels
        x, w = gauss_legendre(per)
        edges = np.linspace(-1.0, 1.0, panels + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
        half = 0.5 * np.diff(edges)[:, None]
        return (mid + half * x).ravel(), (half * w).ravel()

    @property
    def margin_cells(self):
        return 1 if self.interp_order == 1 else 2


# ----------------------------------------------------------------- evaluation


class _Interpolator:
    """Zero-extended spline reader of a field (coefficients computed once)."""

    def __init__(self, f, order):
        self.grid = f.grid
        self.order = order
        vals = f.values
        parts = [vals.real, vals.imag] if np.iscomplexobj(vals) else [vals]
        if order > 1:
            parts = [ndimage.spline_filter(p, order=order, mode="grid-constant") for p in parts]
        self.parts = parts
        self.complex = np.iscomplexobj(vals)

    def __call__(self, coords):
        """Values at physical coordinates ``(..., 2n+1)``."""
        idx = self.grid.to_index(coords)
        flat = idx.reshape(-1, idx.shape[-1]).T
        out = [
            ndimage.map_coordinates(p, flat, order=self.order, mode="grid-constant", cval=0.0, prefilter=False)
            for p in self.parts
        ]
        res = out[0] + 1j * out[1] if self.complex else out[0]
        return res.reshape(idx.shape[:-1])

    def outside(self, coords):
        lo, hi = np.asarray(self.grid.lower), np.asarray(self.grid.upper)
        return np.any((coords < lo) | (coords > hi), axis=-1)


def _windows(f_grid, x, gm, q, adjoint):
    """Per-point box for w where ``x -+ w`` can meet the (padded) field box."""
    n2 = 2 * gm.n
    hs = gm.support_halfwidth
    pad = q.margin_cells * np.asarray(f_grid.spacing[:n2])
    flo = np.asarray(f_grid.lower[:n2]) - pad
    fhi = np.asarray(f_grid.upper[:n2]) + pad
    if adjoint:
        lo, hi = flo - x, fhi - x
    else:
        lo, hi = x - fhi, x - flo
    return np.maximum(lo, -hs), np.minimum(hi, hs)


def _w_nodes(x, gm, q, f_grid, adjoint):
    """Quadrature nodes ``(P, Q, 2n)`` and weights ``(P, Q)`` including the density."""
    n2 = 2 * gm.n
    P = x.shape[0]
    if q.rule == "polar":
        if gm.n != 1:
            raise ValueError("polar rule is implemented for n = 1")
        hs = gm.support_halfwidth
        xr, wr = q.base_rule()
        r = 0.5 * hs * (xr + 1.0)
        wr = 0.5 * hs * wr * r
        na = 2 * q.nodes
        ang = 2 * np.pi * np.arange(na) / na
        w = np.stack([np.outer(r, np.cos(ang)).ravel(), np.outer(r, np.sin(ang)).ravel()], axis=-1)
        wt = np.repeat(wr, na) * (2 * np.pi / na)
        wt = wt * eval_density(gm, w)
        return np.broadcast_to(w, (P,) + w.shape), np.broadcast_to(wt, (P, wt.size))
    lo, hi = _windows(f_grid, x, gm, q, adjoint)
    live = np.all(hi > lo, axis=-1)
    half = np.where(live[:, None], 0.5 * (hi - lo), 0.0)
    mid = 0.5 * (hi + lo)
    xb, wb = q.base_rule()
    k = xb.size
    grids = np.meshgrid(*([np.arange(k)] * n2), indexing="ij")
    combo = np.stack([g.ravel() for g in grids], axis=-1)  # (Q, 2n)
    w = mid[:, None, :] + half[:, None, :] * xb[combo][None, :, :]
    wt = np.prod(half[:, None, :] * wb[combo][None, :, :], axis=-1)
    wt = wt * eval_density(gm, w)
    return w, wt


def _eval_points(x, t, w, gm, adjoint):
    W = symplectic_form_arrays(x[:, None, :], w)
    ph = eval_phase(gm.phase, w)
    if adjoint:
        return np.concatenate([x[:, None, :] + w, (t[:, None] + ph + 0.5 * W)[..., None]], axis=-1)
    return np.concatenate([x[:, None, :] - w, (t[:, None] - ph - 0.5 * W)[..., None]], axis=-1)


def _apply_points(interp, x, t, gm, q, adjoint):
    w, wt = _w_nodes(x, gm, q, interp.grid, adjoint)
    pts = _eval_points(x, t, w, gm, adjoint)
    live = wt != 0
    out_box = interp.outside(pts)
    # beyond the padded box the spline of the zero extension vanishes
    pad = q.margin_cells * np.asarray(interp.grid.spacing)
    far = np.any((pts < np.asarray(interp.grid.lower) - pad) | (pts > np.asarray(interp.grid.upper) + pad), axis=-1)
    read = live & ~far
    vals = np.zeros(wt.shape, dtype=complex if interp.complex else float)
    vals[read] = interp(pts[read])
    missed = int(np.count_nonzero(out_box & live))
    return np.sum(wt * vals, axis=1), missed, int(np.count_nonzero(live))


def _check(f, gm):
    if f.grid.n != gm.n:
        raise DimensionError(f"field is on H^{f.grid.n} but the measure on H^{gm.n}")


def eval_at_points(f, gm, q, x, t, adjoint=False, workers=1, chunk=None):
    """``T f`` (or ``T* f``) at arbitrary points; returns ``(values, coverage)``.

    ``coverage`` is the fraction of weighted quadrature nodes whose
    evaluation point falls inside the field's box.
    """
    _check(f, gm)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    interp = _Interpolator(f, q.interp_order)
    if chunk is None:
        per_point = q.nodes ** (2 * gm.n) * (2 if q.rule == "polar" else 1)
        chunk = max(1, 2_000_000 // per_point)
    starts = range(0, x.shape[0], chunk)
    parts = pool_map(lambda s: _apply_points(interp, x[s : s + chunk], t[s : s + chunk], gm, q, adjoint), starts, workers)
    values = np.concatenate([p[0] for p in parts]) if parts else np.zeros(0)
    missed = sum(p[1] for p in parts)
    live = sum(p[2] for p in parts)
    return values, 1.0 - missed / live if live else 1.0


def _apply(f, gm, q, out_grid, adjoint, workers):
    out_grid = out_grid or f.grid
    pts = out_grid.points()
    vals, cov = eval_at_points(f, gm, q, pts[:, :-1], pts[:, -1], adjoint, workers)
    return SampledField(out_grid, vals, info={"coverage": cov})


def apply_Tnu(f, gm, q, out_grid=None, workers=1):
    """``T f`` on ``out_grid`` (default: the field's grid).

    ``info['coverage']`` of the result is the fraction of quadrature nodes
    that read inside the box; the rest read the zero extension.
    """
    return _apply(f, gm, q, out_grid, False, workers)


def apply_adjoint(g, gm, q, out_grid=None, workers=1):
    return _apply(g, gm, q, out_grid, True, workers)


# ------------------------------------------------------- discrete operator


def _linear_weights(grid, coords):
    """Rows of multilinear interpolation weights; corners outside are dropped."""
    idx = grid.to_index(coords)
    base = np.floor(idx).astype(np.int64)
    frac = idx - base
    shape = np.asarray(grid.shape)
    strides = np.array([int(np.prod(shape[k + 1 :])) for k in range(shape.size)], dtype=np.int64)
    cols, wts = [], []
    for corner in range(2 ** idx.shape[-1]):
        bits = np.array([(corner >> k) & 1 for k in range(idx.shape[-1])])
        c = base + bits
        wgt = np.prod(np.where(bits == 1, frac, 1.0 - frac), axis=-1)
        ok = np.all((c >= 0) & (c < shape), axis=-1)
        cols.append(np.where(ok, c @ strides, 0))
        wts.append(np.where(ok, wgt, 0.0))
    return np.stack(cols, axis=-1), np.stack(wts, axis=-1)


def operator_matrix(grid, gm, q, adjoint=False, chunk=512):
    """Sparse matrix of the discretized operator on ``grid`` (linear reads).

    ``(M @ f.values.ravel())`` reproduces :func:`apply_Tnu` with
    ``interp_order=1``; ``M.T`` is its exact discrete adjoint.
    """
    if grid.n != gm.n:
        raise DimensionError("grid and measure dimensions differ")
    ql = QuadratureSpec(q.nodes, q.rule, 1)
    pts = grid.points()
    blocks = []
    for s in range(0, pts.shape[0], chunk):
        x, t = pts[s : s + chunk, :-1], pts[s : s + chunk, -1]
        w, wt = _w_nodes(x, gm, ql, grid, adjoint)
        ev = _eval_points(x, t, w, gm, adjoint)
        c, lw = _linear_weights(grid, ev)
        contrib = wt[..., None] * lw
        r = np.broadcast_to(np.arange(x.shape[0])[:, None, None], c.shape)
        keep = contrib != 0
        # converting per chunk merges repeated corners early and bounds memory
        blocks.append(
            sparse.coo_matrix((contrib[keep], (r[keep], c[keep])), shape=(x.shape[0], grid.size)).tocsr()
        )
    return sparse.vstack(blocks, format="csr")


# ---------------------------------------------------------------- utilities


def lp_norm(f, p):
    """Riemann-sum ``L^p`` norm on the grid (``p = inf`` gives the max)."""
    a = np.abs(f.values)
    if p == np.inf:
        return float(a.max())
    if p < 1:
        raise ValueError("p must be >= 1")
    return float((np.sum(a**p) * f.grid.cell_volume) ** (1.0 / p))


def translate(f, g, order=None):
    """Left translation ``(tau_g f)(x, t) = f(g^{-1} (x, t))``.

    A pure central shift by a whole number of t-cells is an exact array
    shift; anything else is read by interpolation.
    """
    if not isinstance(g, HPoint):
        raise TypeError("g must be an HPoint")
    if g.n != f.grid.n:
        raise DimensionError("translation and field dimensions differ")
    ht = f.grid.spacing[-1]
    cells = g.t / ht
    if not np.any(g.x) and abs(cells - round(cells)) < 1e-9:
        k = int(round(cells))
        out = np.zeros_like(f.values)
        src = [slice(None)] * f.grid.dim
        dst = [slice(None)] * f.grid.dim
        if k >= 0:
            src[-1], dst[-1] = slice(0, f.grid.shape[-1] - k), slice(k, None)
        else:
            src[-1], dst[-1] = slice(-k, None), slice(0, f.grid.shape[-1] + k)
        out[tuple(dst)] = f.values[tuple(src)]
        return SampledField(f.grid, out)
    pts = f.grid.points()
    x, t = pts[:, :-1], pts[:, -1]
    y = np.broadcast_to(g.x, x.shape)
    src = np.concatenate([x - g.x, (t - g.t - 0.5 * symplectic_form_arrays(y, x))[:, None]], axis=-1)
    interp = _Interpolator(f, order or 3)
    return SampledField(f.grid, interp(src))


def save_field(f, path):
    """Write ``path + '.bin'`` (little-endian float64) and ``path + '.json'``.

    Complex fields are stored as interleaved (re, im) pairs.
    """
    header = f.grid.to_header()
    header["complex"] = bool(np.iscomplexobj(f.values))
    header["dtype"] = "<f8"
    data = f.values.astype(np.complex128).view("<f8") if header["complex"] else f.values.astype("<f8")
    tmp = path + ".bin.tmp"
    data.ravel().tofile(tmp)
    os.replace(tmp, path + ".bin")
    with open(path + ".json.tmp", "w") as fh:
        json.dump(header, fh, indent=2, sort_keys=True)
    os.replace(path + ".json.tmp", path + ".json")


def load_field(path):
    with open(path + ".json") as fh:
        header = json.load(fh)
    grid = Grid(header["n"], tuple(header["half_extents"]), tuple(header["shape"]), tuple(header["center"]))
    data = np.fromfile(path + ".bin", dtype="<f8")
    if header.get("complex"):
        data = data.view(np.complex128)
    return SampledField(grid, data.reshape(grid.shape))


def ensure_resolved(grid, delta, cells=4):
    """Raise :class:`ResolutionError` unless ``delta`` spans ``cells`` cells per axis."""
    worst = max(grid.spacing)
    if delta / worst < cells:
        raise ResolutionError(f"delta={delta:g} spans {delta / worst:.2f} cells; need >= {cells}")


def commutation_gap(f, gm, q, g, cells=2, workers=1):
    """Relative L2 gap between ``tau_g(T f)`` and ``T(tau_g f)``.

    Only nodes whose pre-image ``g^{-1} (x, t)`` lies ``cells`` cells inside
    the box are compared, so truncation of ``T f`` at the box edge does not
    enter.
    """
    Tf = apply_Tnu(f, gm, q, workers=workers)
    lhs = translate(Tf, g)
    rhs = apply_Tnu(translate(f, g), gm, q, workers=workers)
    pts = f.grid.points()
    x, t = pts[:, :-1], pts[:, -1]
    src = np.concatenate([x - g.x, (t - g.t - 0.5 * symplectic_form_arrays(np.broadcast_to(g.x, x.shape), x))[:, None]], axis=-1)
    pad = cells * np.asarray(f.grid.spacing)
    inside = np.all((src >= np.asarray(f.grid.lower) + pad) & (src <= np.asarray(f.grid.upper) - pad), axis=-1)
    inside = inside.reshape(f.grid.shape)
    diff = np.abs(lhs.values - rhs.values)[inside]
    ref = np.abs(Tf.values)[inside]
    return float(np.sqrt(np.sum(diff**2) / np.sum(ref**2)))
