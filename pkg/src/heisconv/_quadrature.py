"""Low-level 1-D quadrature helpers (composite and adaptive Gauss-Legendre)."""

from functools import lru_cache

import numpy as np

from .errors import AccuracyError


@lru_cache(maxsize=None)
def gauss_legendre(order):
    """Nodes and weights of the ``order``-point rule on [-1, 1] (read-only)."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def composite_rule(edges, order=16):
    """Flattened nodes and weights of a Gauss-Legendre rule on each panel."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = mid[:, None] + half[:, None] * x
    weights = half[:, None] * w
    return nodes.ravel(), weights.ravel()


def panel_edges(a, b, max_width, min_panels=1):
    count = max(min_panels, int(np.ceil((b - a) / max_width)))
    return np.linspace(a, b, count + 1)


def power_singular_quad(g, x0, a, b, power, ratio=0.5, depth=60, order=16, max_cell=np.inf):
    """Integrate ``|x - x0|**power * g(x)`` over [a, b] for Re(power) > -1.

    Cells shrink geometrically toward ``c = clip(x0, a, b)``; cells wider
    than ``max_cell`` are split evenly so that features of ``g`` away from
    ``c`` are resolved. When ``x0`` lies inside [a, b] the innermost cell on
    each side uses the leading term ``g(x0) d**(power+1) / (power+1)``;
    otherwise the integrand is bounded there and the leftover cell is
    dropped. ``g`` must be vectorized and smooth.
    """
    x, w = gauss_legendre(order)
    c = min(max(x0, a), b)
    inside = c == x0
    gap = abs(x0 - c)
    total = 0.0
    for sign, length in ((-1.0, c - a), (1.0, b - c)):
        if length <= 0:
            continue
        outer = length * ratio ** np.arange(depth)
        inner = np.append(outer[1:], 0.0) if not inside else outer * ratio
        if np.isfinite(max_cell):
            pieces = np.maximum(1, np.ceil((outer - inner) / max_cell)).astype(int)
            step = np.repeat((outer - inner) / pieces, pieces)
            rank = np.arange(pieces.sum()) - np.repeat(np.cumsum(pieces) - pieces, pieces)
            lo_d = np.repeat(inner, pieces) + rank * step
            hi_d = lo_d + step
        else:
            lo_d, hi_d = inner, outer
        d = 0.5 * (hi_d + lo_d)[:, None] + 0.5 * (hi_d - lo_d)[:, None] * x
        dw = 0.5 * (hi_d - lo_d)[:, None] * w
        pts = c + sign * d
        # distance from x0 taken from d, so no cancellation near the tip
        kern = (d + gap) ** power
        total = total + np.sum(dw * kern * g(pts.ravel()).reshape(pts.shape))
        if inside:
            eps = inner[-1]
            total = total + g(np.array([float(x0)]))[0] * eps ** (power + 1) / (power + 1)
    return total


def adaptive_gl(f, a, b, tol, edges=None, order=10, max_intervals=200_000, rtol=0.0):
    """Adaptive integration of a vectorized (possibly complex) ``f``.

    Each interval is integrated with ``order`` and ``2*order`` point
    Gauss-Legendre rules; the difference is the error estimate. Intervals
    whose estimate exceeds their share of ``max(tol, rtol * |value|)`` are
    bisected. An interval is also accepted once its estimate is at the
    rounding level of ``sum |f| w`` on it.

    Returns ``(value, error)``; raises :class:`AccuracyError` when the
    interval budget runs out.
    """
    xl, wl = gauss_legendre(order)
    xh, wh = gauss_legendre(2 * order)
    if edges is None:
        edges = np.array([a, b], dtype=float)
    lo = np.asarray(edges[:-1], dtype=float)
    hi = np.asarray(edges[1:], dtype=float)
    total = b - a
    value = 0.0
    error = 0.0
    evaluated = 0
    while lo.size:
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        fl = f((mid[:, None] + half[:, None] * xl).ravel()).reshape(lo.size, -1)
        fh = f((mid[:, None] + half[:, None] * xh).ravel()).reshape(lo.size, -1)
        ql = half * (fl @ wl)
        qh = half * (fh @ wh)
        err = np.abs(qh - ql)
        noise = 64 * np.finfo(float).eps * half * (np.abs(fh) @ wh)
        budget = max(tol, rtol * abs(value + qh.sum()))
        share = budget * (hi - lo) / total
        done = (err <= share) | (err <= noise) | (half <= 1e-15 * max(1.0, abs(a), abs(b)))
        value += qh[done].sum()
        error += err[done].sum()
        evaluated += lo.size
        lo, hi = lo[~done], hi[~done]
        if lo.size and evaluated + 2 * lo.size > max_intervals:
            estimate = value + qh[~done].sum()
            raise AccuracyError(
                f"adaptive quadrature on [{a}, {b}] did not reach tol={tol:g}",
                estimate=estimate,
                error=error + err[~done].sum(),
            )
        mid = 0.5 * (lo + hi)
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
    return value, error
