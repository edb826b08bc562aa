"""Euclidean kernel on R^n: inner product, norm, CBS gap, angle, means.

All functions accept array-likes and validate them with
:func:`cbskit._validation.check_vector`. Reductions go through ``numpy.dot``
in double precision without compensated summation.
"""

from typing import NamedTuple, Optional

import numpy as np

from ._validation import check_same_length, check_vector
from .exceptions import CBSError

#: relative threshold on ``gap / (||x||^2 ||y||^2)`` below which a pair is collinear
EQUALITY_TOL = 1e-10


class CBSGap(NamedTuple):
    gap: float
    equality: bool


class TriangleCheck(NamedTuple):
    lhs: float
    rhs: float


class Means(NamedTuple):
    am: float
    gm: float
    hm: Optional[float]


def _pair(x, y):
    x = check_vector(x, "x")
    y = check_vector(y, "y")
    check_same_length(x, y, names=("x", "y"))
    return x, y


def inner_product(x, y):
    """Return ``sum(x_i * y_i)``."""
    x, y = _pair(x, y)
    return float(np.dot(x, y))


def norm(x):
    x = check_vector(x, "x")
    return float(np.sqrt(np.dot(x, x)))


def cbs_gap(x, y, tol_eq=EQUALITY_TOL):
    """Gap ``||x||^2 ||y||^2 - (x.y)^2`` of the CBS inequality.

    ``equality`` is true when the gap is at most ``tol_eq`` times
    ``||x||^2 ||y||^2``, i.e. when ``x`` and ``y`` are collinear to working
    precision. A zero argument counts as equality.

    >>> cbs_gap([2, 4], [1, 2])
    CBSGap(gap=0.0, equality=True)
    """
    x, y = _pair(x, y)
    xx = float(np.dot(x, x))
    yy = float(np.dot(y, y))
    xy = float(np.dot(x, y))
    scale = xx * yy
    gap = scale - xy * xy
    if scale == 0.0:
        return CBSGap(gap, True)
    return CBSGap(gap, gap <= tol_eq * scale)


def lagrange_gap(x, y):
    """Lagrange double sum ``sum_i sum_j (x_i y_j - x_j y_i)^2``.

    This is a sum of squares and therefore never negative; it equals twice
    :func:`cbs_gap` in exact arithmetic. Used as an independent check on the
    closed-form gap, so it is evaluated term by term via the outer products.
    """
    x, y = _pair(x, y)
    d = np.outer(x, y)
    d -= d.T
    return float(np.vdot(d, d))


def discriminant_min(x, y):
    """Minimum over t of ``||y||^2 t^2 - 2 (x.y) t + ||x||^2``.

    The quadratic is ``||x - t y||^2`` and is attained at ``t = x.y / ||y||^2``;
    it equals ``cbs_gap / ||y||^2``. Requires ``y != 0``.
    """
    x, y = _pair(x, y)
    yy = float(np.dot(y, y))
    if yy == 0.0:
        raise CBSError("discriminant form needs a nonzero y")
    xy = float(np.dot(x, y))
    t = xy / yy
    return yy * t * t - 2.0 * xy * t + float(np.dot(x, x))


def angle(x, y):
    """Angle between two nonzero vectors, in ``[0, pi]``."""
    x, y = _pair(x, y)
    mx = np.abs(x).max()
    my = np.abs(y).max()
    if mx == 0.0 or my == 0.0:
        raise CBSError("angle is undefined for a zero vector")
    # rescale so tiny or huge entries neither underflow nor overflow
    x = x / mx
    y = y / my
    nx = np.sqrt(np.dot(x, x))
    ny = np.sqrt(np.dot(y, y))
    ratio = np.dot(x, y) / (nx * ny)
    return float(np.arccos(np.clip(ratio, -1.0, 1.0)))


def triangle_check(x, y):
    x, y = _pair(x, y)
    s = x + y
    lhs = float(np.sqrt(np.dot(s, s)))
    rhs = float(np.sqrt(np.dot(x, x)) + np.sqrt(np.dot(y, y)))
    return TriangleCheck(lhs, rhs)


def mean_chain(a, harmonic=True):
    """Arithmetic, geometric and harmonic means of nonnegative numbers.

    The geometric mean is computed as ``exp(mean(log a))`` and is 0 as soon
    as one entry is 0. The harmonic mean needs strictly positive entries;
    pass ``harmonic=False`` to skip it (``hm`` is then ``None``).

    >>> mean_chain([1, 2, 4])  # doctest: +ELLIPSIS
    Means(am=2.333..., gm=2.0..., hm=1.714...)
    """
    a = check_vector(a, "a")
    if np.any(a < 0):
        raise CBSError("mean_chain needs nonnegative entries")
    n = a.size
    am = float(np.sum(a) / n)
    if np.any(a == 0):
        if harmonic:
            raise CBSError("harmonic mean is undefined when an entry is zero")
        return Means(am, 0.0, None)
    gm = float(np.exp(np.sum(np.log(a)) / n))
    hm = float(n / np.sum(1.0 / a)) if harmonic else None
    return Means(am, gm, hm)
