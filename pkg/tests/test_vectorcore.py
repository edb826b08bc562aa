import doctest
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst
from hypothesis.extra import numpy as hnp

from cbskit import vectorcore as vc
from cbskit.exceptions import CBSError, DimensionMismatchError

finite = hst.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def pairs(min_size=1, max_size=20):
    return hst.integers(min_size, max_size).flatmap(
        lambda n: hst.tuples(hnp.arrays(float, n, elements=finite), hnp.arrays(float, n, elements=finite))
    )


def exact_gap(x, y):
    # rational arithmetic oracle for ||x||^2 ||y||^2 - (x.y)^2
    fx = [Fraction(v) for v in x]
    fy = [Fraction(v) for v in y]
    xx = sum(a * a for a in fx)
    yy = sum(b * b for b in fy)
    xy = sum(a * b for a, b in zip(fx, fy))
    return xx * yy - xy * xy, xx * yy


def test_doctests():
    assert doctest.testmod(vc).failed == 0


def test_hand_values():
    assert vc.inner_product([1, 2, 3], [4, 5, 6]) == 32.0
    assert vc.norm([3, 4]) == 5.0
    g = vc.cbs_gap([1, 0], [0, 1])
    assert g.gap == 1.0 and not g.equality
    assert vc.lagrange_gap([1, 0], [0, 1]) == 2.0
    assert vc.angle([1, 0], [0, 2]) == pytest.approx(np.pi / 2)
    assert vc.angle([1, 1], [-2, -2]) == pytest.approx(np.pi)
    lhs, rhs = vc.triangle_check([1, 0], [0, 1])
    assert lhs == pytest.approx(np.sqrt(2)) and rhs == 2.0


def test_zero_vector_is_equality():
    assert vc.cbs_gap([0, 0], [1, 2]).equality
    with pytest.raises(CBSError):
        vc.angle([0, 0], [1, 2])
    with pytest.raises(CBSError):
        vc.discriminant_min([1, 2], [0, 0])


def test_input_validation():
    with pytest.raises(DimensionMismatchError):
        vc.inner_product([1, 2], [1, 2, 3])
    with pytest.raises(CBSError):
        vc.norm([1.0, np.nan])
    with pytest.raises(CBSError):
        vc.norm([])


def test_mean_chain():
    am, gm, hm = vc.mean_chain([2, 8])
    assert (am, gm, hm) == pytest.approx((5.0, 4.0, 3.2))
    assert vc.mean_chain([3, 3, 3]) == pytest.approx((3, 3, 3))
    am, gm, hm = vc.mean_chain([0, 4], harmonic=False)
    assert gm == 0.0 and hm is None
    with pytest.raises(CBSError):
        vc.mean_chain([0, 4])
    with pytest.raises(CBSError):
        vc.mean_chain([-1, 4])


@settings(max_examples=200, deadline=None)
@given(pairs())
def test_gap_against_rational_oracle(xy):
    x, y = xy
    exact, scale = exact_gap(x, y)
    gap = vc.cbs_gap(x, y).gap
    assert abs(gap - float(exact)) <= 1e-12 * float(scale) + 1e-300
    assert gap >= -1e-12 * float(scale) - 1e-300  # absolute floor for subnormal products


@settings(max_examples=200, deadline=None)
@given(pairs())
def test_lagrange_identity(xy):
    x, y = xy
    scale = 2 * np.dot(x, x) * np.dot(y, y)
    assert abs(vc.lagrange_gap(x, y) - 2 * vc.cbs_gap(x, y).gap) <= 1e-10 * scale + 1e-300
    assert vc.lagrange_gap(x, y) >= 0


@settings(max_examples=100, deadline=None)
@given(pairs(min_size=2), hst.floats(0.1, 10), hst.sampled_from([-1.0, 1.0]))
def test_collinear_pairs(xy, lam, sign):
    x, _ = xy
    if not np.any(x):
        return
    y = sign * lam * x
    if not np.any(y):  # the scaled partner underflowed to zero
        return
    assert vc.cbs_gap(x, y).equality
    th = vc.angle(x, y)
    assert min(th, np.pi - th) <= 1e-6


@settings(max_examples=100, deadline=None)
@given(pairs())
def test_discriminant_equals_gap_over_norm(xy):
    x, y = xy
    yy = np.dot(y, y)
    if yy == 0:
        return
    d = vc.discriminant_min(x, y)
    assert d >= -1e-12 * np.dot(x, x)
    assert d == pytest.approx(vc.cbs_gap(x, y).gap / yy, abs=1e-9 * np.dot(x, x) + 1e-300)


@settings(max_examples=100, deadline=None)
@given(hnp.arrays(float, hst.integers(1, 30), elements=hst.floats(1e-3, 1e3)))
def test_mean_ordering(a):
    am, gm, hm = vc.mean_chain(a)
    assert am >= gm * (1 - 1e-12) and gm >= hm * (1 - 1e-12)
    # oracle: scipy's means
    from scipy import stats
    assert gm == pytest.approx(stats.gmean(a), rel=1e-12)
    assert hm == pytest.approx(stats.hmean(a), rel=1e-12)


def test_outputs_are_not_mutated(rng):
    x = rng.standard_normal(5)
    y = rng.standard_normal(5)
    x0, y0 = x.copy(), y.copy()
    vc.lagrange_gap(x, y)
    vc.triangle_check(x, y)
    np.testing.assert_array_equal(x, x0)
    np.testing.assert_array_equal(y, y0)
