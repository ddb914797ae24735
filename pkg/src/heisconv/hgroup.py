"""Heisenberg group H^n realized as R^{2n} x R.

The product is ``(x, t) . (y, s) = (x + y, t + s + W(x, y) / 2)`` with the
symplectic form ``W(x, y) = sum_j (y[n+j] x[j] - y[j] x[n+j])``. Identifying
``x = (x', x'')`` with ``x' + i x''`` in C^n recovers the complex picture;
nothing here depends on it.

The scalar API works on :class:`HPoint`; the ``*_arrays`` variants take
stacked coordinates (last axis of length 2n) and are what the convolution
code uses.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


def _as_vector(x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0 or x.size % 2:
        raise DimensionError(f"expected a vector of even length 2n, got shape {x.shape}")
    return x


@dataclass(frozen=True)
class HPoint:
    """A point ``(x, t)`` of H^n with ``x`` in R^{2n}."""

    x: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        x = _as_vector(self.x).copy()
        x.flags.writeable = False
        t = float(self.t)
        if not (np.all(np.isfinite(x)) and np.isfinite(t)):
            raise ValueError("HPoint coordinates must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", t)

    @property
    def n(self):
        return self.x.size // 2

    @classmethod
    def identity(cls, n):
        return cls(np.zeros(2 * n), 0.0)

    def __mul__(self, other):
        return group_mul(self, other)

    def __eq__(self, other):
        if not isinstance(other, HPoint):
            return NotImplemented
        return self.t == other.t and np.array_equal(self.x, other.x)

    def __hash__(self):
        return hash((self.x.tobytes(), self.t))

    def as_array(self):
        return np.append(self.x, self.t)


def symplectic_form_arrays(x, y):
    """W(x, y) over the last axis; broadcasts."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1] or x.shape[-1] % 2:
        raise DimensionError(
            f"symplectic form needs equal even lengths, got {x.shape[-1]} and {y.shape[-1]}"
        )
    n = x.shape[-1] // 2
    return np.sum(y[..., n:] * x[..., :n] - y[..., :n] * x[..., n:], axis=-1)


def symplectic_form(x, y):
    x, y = _as_vector(x), _as_vector(y)
    if x.size != y.size:
        raise DimensionError(f"lengths differ: {x.size} vs {y.size}")
    return float(symplectic_form_arrays(x, y))


def group_mul_arrays(x, t, y, s):
    """Product of stacked points; returns ``(x + y, t + s + W(x, y)/2)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return x + y, np.asarray(t) + np.asarray(s) + 0.5 * symplectic_form_arrays(x, y)


def group_mul(p, q):
    if p.n != q.n:
        raise DimensionError(f"cannot multiply points of H^{p.n} and H^{q.n}")
    x, t = group_mul_arrays(p.x, p.t, q.x, q.t)
    return HPoint(x, float(t))


def group_inv(p):
    return HPoint(-p.x, -p.t)
