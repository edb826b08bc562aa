"""Gauss-Legendre quadrature and the integral inequalities of Young, Hoelder
and Minkowski, evaluated on sampled nonnegative functions."""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from ._validation import check_vector
from .exceptions import CBSError, DimensionMismatchError

DEFAULT_POINTS = 16
#: gap tolerance for Hoelder/Minkowski, relative to max(rhs, 1)
POWER_GAP_TOL = 1e-9


@lru_cache(maxsize=64)
def _legendre_nodes(n):
    # Newton on P_n with the three-term recurrence; nodes symmetric about 0.
    m = (n + 1) // 2
    x = np.cos(np.pi * (np.arange(1, m + 1) - 0.25) / (n + 0.5))
    for _ in range(100):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for k in range(2, n + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) <= 1e-15:
            break
    # one more evaluation at the converged nodes for the weights
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    if n % 2:
        x[-1] = 0.0
    nodes = np.concatenate([-x, x[::-1][n % 2:]])
    weights = np.concatenate([w, w[::-1][n % 2:]])
    return nodes, weights


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and positive weights on ``[a, b]`` exact up to degree ``order``.

    Use :meth:`gauss_legendre` to build one; ``order`` is ``2 * n_points - 1``.
    Multi-dimensional rules (nodes of shape ``(m, d)``) come from
    :meth:`tensor`.
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int
    interval: tuple = (0.0, 1.0)

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        weights = np.array(check_vector(self.weights, "weights"))
        if nodes.shape[0] != weights.size:
            raise CBSError("node count and weight count differ")
        if np.any(weights <= 0):
            raise CBSError("quadrature weights must be positive")
        if nodes.ndim == 1 and np.any(np.diff(nodes) <= 0):
            raise CBSError("quadrature nodes must be strictly increasing")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def gauss_legendre(cls, n_points=DEFAULT_POINTS, a=0.0, b=1.0):
        if n_points < 1:
            raise CBSError("a Gauss rule needs at least one point")
        if not b > a:
            raise CBSError("interval must satisfy a < b")
        t, w = _legendre_nodes(int(n_points))
        half = 0.5 * (b - a)
        return cls(half * t + 0.5 * (a + b), half * w, 2 * int(n_points) - 1, (float(a), float(b)))

    @classmethod
    def tensor(cls, *rules):
        """Tensor-product rule on the box spanned by the given 1-D rules."""
        grids = np.meshgrid(*[r.nodes for r in rules], indexing="ij")
        wgrids = np.meshgrid(*[r.weights for r in rules], indexing="ij")
        nodes = np.stack([g.ravel() for g in grids], axis=1)
        weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
        return cls(nodes, weights, min(r.order for r in rules), tuple(r.interval for r in rules))

    def __len__(self):
        return self.weights.size

    def same_grid(self, other):
        return self is other or (
            self.nodes.shape == other.nodes.shape
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )

    def integrate(self, values):
        return float(np.dot(self.weights, values))

    def sample(self, func):
        """Sample a callable at the nodes as a :class:`SampledFunction`."""
        nodes = self.nodes if self.nodes.ndim == 1 else self.nodes.T
        return SampledFunction(self, np.broadcast_to(func(nodes), (len(self),)))


@dataclass(frozen=True, eq=False)
class SampledFunction:
    rule: QuadratureRule
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(check_vector(self.values, "values"))
        if values.size != len(self.rule):
            raise DimensionMismatchError(
                f"{values.size} samples for a rule with {len(self.rule)} nodes"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def integral(self):
        return self.rule.integrate(self.values)


@dataclass(frozen=True)
class ConjugatePair:
    """Exponents ``p, q > 1`` with ``1/p + 1/q = 1``; ``q`` defaults to ``p/(p-1)``."""

    p: float
    q: float = None

    def __post_init__(self):
        p = float(self.p)
        if not p > 1 or not np.isfinite(p):
            raise CBSError(f"conjugate exponent p must be in (1, inf), got {self.p!r}")
        q = p / (p - 1.0) if self.q is None else float(self.q)
        if not q > 1:
            raise CBSError(f"conjugate exponent q must be > 1, got {q!r}")
        if abs(1.0 / p + 1.0 / q - 1.0) > 1e-12:
            raise CBSError(f"1/p + 1/q = {1 / p + 1 / q!r} is not 1")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)


class YoungCheck(NamedTuple):
    lhs: float
    rhs: float
    equality: bool


class InequalityCheck(NamedTuple):
    lhs: float
    rhs: float
    gap: float

    def holds(self, tol=POWER_GAP_TOL):
        return self.gap >= -tol * max(self.rhs, 1.0)


def power(values, p):
    """``values ** p`` for nonnegative samples via ``exp(p log v)``, with 0 -> 0."""
    values = np.asarray(values, dtype=float)
    out = np.zeros_like(values)
    pos = values > 0
    out[pos] = np.exp(p * np.log(values[pos]))
    return out


def _shared_grid(f, g, rule, nonnegative=True):
    if not f.rule.same_grid(g.rule):
        raise DimensionMismatchError("f and g are sampled on different grids")
    if rule is not None and not rule.same_grid(f.rule):
        raise DimensionMismatchError("functions are not sampled on the given rule")
    if nonnegative:
        for name, h in (("f", f), ("g", g)):
            if np.any(h.values < 0):
                raise CBSError(f"{name} has negative samples; expected values in [0, inf)")
    return f.rule


def young_check(x, y, pair, tol=1e-10):
    """Young's inequality ``xy <= x^p/p + y^q/q`` for ``x, y >= 0``.

    Equality holds exactly when ``x^p == y^q``; compared relative to the
    larger of the two.
    """
    if x < 0 or y < 0:
        raise CBSError("young_check needs x, y >= 0")
    xp = float(power([x], pair.p)[0])
    yq = float(power([y], pair.q)[0])
    lhs = float(x) * float(y)
    rhs = xp / pair.p + yq / pair.q
    equality = abs(xp - yq) <= tol * max(xp, yq, np.finfo(float).tiny)
    return YoungCheck(lhs, rhs, bool(equality))


def lp_norm(f, p):
    return f.rule.integrate(power(f.values, p)) ** (1.0 / p)


def holder_check(f, g, pair, rule=None):
    """Hoelder: ``int fg <= ||f||_p ||g||_q`` for nonnegative samples."""
    q_rule = _shared_grid(f, g, rule)
    lhs = q_rule.integrate(f.values * g.values)
    rhs = lp_norm(f, pair.p) * lp_norm(g, pair.q)
    return InequalityCheck(lhs, rhs, rhs - lhs)


def integral_cbs_check(f, g, rule=None):
    """Integral CBS ``int fg <= (int f^2)^(1/2) (int g^2)^(1/2)`` (signs allowed)."""
    q_rule = _shared_grid(f, g, rule, nonnegative=False)
    w = q_rule.weights
    lhs = float(np.dot(w, f.values * g.values))
    rhs = float(np.sqrt(np.dot(w, f.values * f.values)) * np.sqrt(np.dot(w, g.values * g.values)))
    return InequalityCheck(lhs, rhs, rhs - lhs)


def minkowski_check(f, g, p, rule=None):
    """Minkowski: ``||f + g||_p <= ||f||_p + ||g||_p`` for nonnegative samples."""
    p = float(p)
    if not p > 1:
        raise CBSError(f"Minkowski exponent must be > 1, got {p!r}")
    q_rule = _shared_grid(f, g, rule)
    lhs = q_rule.integrate(power(f.values + g.values, p)) ** (1.0 / p)
    rhs = lp_norm(f, p) + lp_norm(g, p)
    return InequalityCheck(lhs, rhs, rhs - lhs)


def crude_power_bound(f, g, p):
    """Return ``(int (f+g)^p, 2^p (int f^p + int g^p))``; the first never exceeds the second."""
    rule = _shared_grid(f, g, None)
    lhs = rule.integrate(power(f.values + g.values, p))
    rhs = 2.0**p * (rule.integrate(power(f.values, p)) + rule.integrate(power(g.values, p)))
    return lhs, rhs
