"""Weighted CBS-type inequality for the covariance-like bilinear form

    <x, y> = (sum p_i)(sum p_i x_i y_i) - (sum p_i x_i)(sum p_i y_i)

and its integral counterpart with a positive weight function.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ._validation import check_same_length, check_vector, check_weights
from .exceptions import CBSError, DimensionMismatchError
from .symlin import eigen_sym

EQUALITY_TOL = 1e-10


@dataclass(frozen=True)
class WeightedPairReport:
    """Both sides of the weighted inequality ``lhs <= rhs``.

    ``equality`` flags the extremal case ``|lhs| == rhs``, which happens
    exactly when some ``a x + b y`` is a constant vector; ``combo`` then holds
    ``(a, b, c)`` normalized to ``a^2 + b^2 = 1``.
    """

    lhs: float
    rhs: float
    gap: float
    equality: bool
    combo: Optional[Tuple[float, float, float]] = None

    @property
    def scale(self):
        return max(abs(self.lhs), self.rhs, 1.0)


def _triple(p, x, y):
    p = check_weights(p)
    x = check_vector(x, "x")
    y = check_vector(y, "y")
    check_same_length(p, x, y, names=("p", "x", "y"))
    return p, x, y


def _centered_form(p, x, y):
    # (sum p) * sum p (x - xbar)(y - ybar) with p-weighted means; algebraically
    # the same as the product form but free of its cancellation.
    sp = p.sum()
    dx = x - np.dot(p, x) / sp
    dy = y - np.dot(p, y) / sp
    return float(sp * np.dot(p, dx * dy))


def weighted_form(p, x, y):
    """Evaluate ``<x, y>_p``; symmetric, bilinear and positive semidefinite.

    >>> weighted_form([1, 1], [1, 2], [3, 5])
    2.0
    """
    return _centered_form(*_triple(p, x, y))


def recover_combo(x, y):
    """Least-squares ``(a, b, c)`` with ``a^2 + b^2 = 1`` minimizing ``||a x + b y - c 1||``.

    ``c`` is the mean of ``a x + b y``; ``(a, b)`` is the eigenvector of the
    smallest eigenvalue of the Gram matrix of the centered vectors. The sign
    is fixed so the first nonzero of ``(a, b)`` is positive.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xc = x - x.mean()
    yc = y - y.mean()
    gram = np.array([[np.dot(xc, xc), np.dot(xc, yc)], [np.dot(xc, yc), np.dot(yc, yc)]])
    a, b = eigen_sym(gram).eigenvectors[:, 0]
    if a < 0 or (a == 0 and b < 0):
        a, b = -a, -b
    c = float(np.mean(a * x + b * y))
    return float(a), float(b), c


def combo_residual(x, y, combo):
    a, b, c = combo
    return float(np.linalg.norm(a * np.asarray(x) + b * np.asarray(y) - c))


def _report(lhs, xx, yy, x, y, tol_eq):
    xx = max(xx, 0.0)
    yy = max(yy, 0.0)
    rhs = float(np.sqrt(xx) * np.sqrt(yy))
    gap = rhs - lhs
    equality = rhs == 0.0 or rhs - abs(lhs) <= tol_eq * rhs
    combo = recover_combo(x, y) if equality else None
    return WeightedPairReport(float(lhs), rhs, float(gap), bool(equality), combo)


def weighted_cbs_check(p, x, y, tol_eq=EQUALITY_TOL):
    """Check ``<x, y>_p <= sqrt(<x, x>_p) sqrt(<y, y>_p)`` and detect equality."""
    p, x, y = _triple(p, x, y)
    lhs = _centered_form(p, x, y)
    return _report(lhs, _centered_form(p, x, x), _centered_form(p, y, y), x, y, tol_eq)


def _check_integral_inputs(p, f, g, rule):
    if rule is None:
        rule = p.rule
    for name, h in (("p", p), ("f", f), ("g", g)):
        if not h.rule.same_grid(rule):
            raise DimensionMismatchError(f"{name} is not sampled on the quadrature grid")
    if np.any(p.values <= 0):
        raise CBSError("weight function p must be strictly positive on the grid")
    return rule


def integral_weighted_form(p, f, g, rule=None):
    """Quadrature value of ``int p * int p f g - int p f * int p g``."""
    rule = _check_integral_inputs(p, f, g, rule)
    w = rule.weights
    pv = p.values
    return float(
        np.dot(w, pv) * np.dot(w, pv * f.values * g.values)
        - np.dot(w, pv * f.values) * np.dot(w, pv * g.values)
    )


def integral_weighted_cbs_check(p, f, g, rule=None, tol_eq=EQUALITY_TOL):
    rule = _check_integral_inputs(p, f, g, rule)
    lhs = integral_weighted_form(p, f, g, rule)
    ff = integral_weighted_form(p, f, f, rule)
    gg = integral_weighted_form(p, g, g, rule)
    return _report(lhs, ff, gg, f.values, g.values, tol_eq)
