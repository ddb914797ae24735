import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heisconv import DimensionError, HPoint, group_inv, group_mul, symplectic_form
from heisconv.hgroup import group_mul_arrays, symplectic_form_arrays

coord = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


def points(n):
    return st.builds(
        lambda xs, t: HPoint(np.array(xs), t), st.lists(coord, min_size=2 * n, max_size=2 * n), coord
    )


def close(p, q, tol=1e-12):
    scale = max(1.0, np.max(np.abs(q.x)), abs(q.t))
    return np.max(np.abs(p.x - q.x)) <= tol * scale and abs(p.t - q.t) <= tol * scale * 100


def test_product_example():
    p = HPoint([1.0, 0.0], 0.0)
    q = HPoint([0.0, 1.0], 0.0)
    # W(x, y) = y2 x1 - y1 x2 = 1
    assert group_mul(p, q).t == 0.5
    assert group_mul(q, p).t == -0.5


@given(points(1), points(1), points(1))
def test_associative(p, q, r):
    assert close(group_mul(group_mul(p, q), r), group_mul(p, group_mul(q, r)))


@given(points(2))
def test_identity_and_inverse(p):
    e = HPoint.identity(2)
    assert group_mul(p, e) == p
    assert group_mul(e, p) == p
    assert group_mul(p, group_inv(p)) == e
    assert group_mul(group_inv(p), p) == e


@given(st.lists(coord, min_size=4, max_size=4), st.lists(coord, min_size=4, max_size=4))
def test_symplectic_antisymmetric(x, y):
    assert symplectic_form(x, y) == -symplectic_form(y, x)
    assert symplectic_form(x, x) == 0.0


@settings(max_examples=30)
@given(points(1), points(1))
def test_commutator_is_central(p, q):
    # p q p^{-1} q^{-1} = (0, W(x, y))
    c = group_mul(group_mul(p, q), group_mul(group_inv(p), group_inv(q)))
    assert np.all(c.x == 0)
    assert c.t == pytest.approx(symplectic_form(p.x, q.x), rel=1e-12, abs=1e-9)


def test_arrays_match_scalar(rng):
    x, y = rng.normal(size=(5, 4)), rng.normal(size=(5, 4))
    t, s = rng.normal(size=5), rng.normal(size=5)
    X, T = group_mul_arrays(x, t, y, s)
    for i in range(5):
        p = group_mul(HPoint(x[i], t[i]), HPoint(y[i], s[i]))
        np.testing.assert_array_equal(p.x, X[i])
        assert p.t == T[i]


def test_dimension_errors():
    with pytest.raises(DimensionError):
        HPoint([1.0, 2.0, 3.0])
    with pytest.raises(DimensionError):
        group_mul(HPoint([0.0, 0.0]), HPoint([0.0] * 4))
    with pytest.raises(DimensionError):
        symplectic_form_arrays(np.zeros(2), np.zeros(4))
    with pytest.raises(ValueError):
        HPoint([np.nan, 0.0])


def test_hpoint_immutable_and_hashable():
    p = HPoint([1.0, 2.0], 3.0)
    with pytest.raises(ValueError):
        p.x[0] = 5.0
    assert {p: 1}[HPoint([1.0, 2.0], 3.0)] == 1
    np.testing.assert_array_equal(p.as_array(), [1.0, 2.0, 3.0])
