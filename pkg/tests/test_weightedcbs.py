import doctest
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from cbskit import integralineq as ii
from cbskit import weightedcbs as wc
from cbskit.exceptions import CBSError, DimensionMismatchError


def product_form_exact(p, x, y):
    # (sum p)(sum pxy) - (sum px)(sum py) in rational arithmetic
    p, x, y = ([Fraction(v) for v in a] for a in (p, x, y))
    sp = sum(p)
    return sp * sum(a * b * c for a, b, c in zip(p, x, y)) - sum(a * b for a, b in zip(p, x)) * sum(
        a * c for a, c in zip(p, y)
    )


def pair_sum(p, x, y):
    # half double sum of p_i p_j (x_i - x_j)(y_i - y_j)
    dx = x[:, None] - x[None, :]
    dy = y[:, None] - y[None, :]
    return 0.5 * float(np.sum(np.outer(p, p) * dx * dy))


def test_doctests():
    assert doctest.testmod(wc).failed == 0


def test_unit_weights_hand_example():
    # 2x + y = 7, so the pair is anti-collinear after centering
    rep = wc.weighted_cbs_check([1, 1, 1], [1, 2, 3], [5, 3, 1])
    assert rep.lhs == pytest.approx(-12.0)
    assert rep.rhs == pytest.approx(12.0)
    assert rep.equality
    a, b, c = rep.combo
    assert wc.combo_residual([1, 2, 3], [5, 3, 1], rep.combo) < 1e-12
    np.testing.assert_allclose(rep.combo, np.array([2, 1, 7]) / np.sqrt(5), rtol=1e-12)


def test_against_two_oracles(rng):
    for _ in range(50):
        n = int(rng.integers(2, 12))
        p = rng.uniform(0.1, 5, n)
        x = rng.standard_normal(n)
        y = rng.standard_normal(n)
        got = wc.weighted_form(p, x, y)
        exact = float(product_form_exact(p, x, y))
        scale = p.sum() ** 2 * np.linalg.norm(x) * np.linalg.norm(y)
        assert got == pytest.approx(exact, abs=1e-13 * scale)
        assert got == pytest.approx(pair_sum(p, x, y), abs=1e-12 * scale)


def test_inequality_and_equality_detection(rng):
    for _ in range(200):
        n = int(rng.integers(3, 20))  # any two 2-vectors are affinely related
        p = rng.uniform(0.1, 10, n)
        x = rng.standard_normal(n)
        y = rng.standard_normal(n)
        rep = wc.weighted_cbs_check(p, x, y)
        assert rep.gap >= -1e-10 * rep.scale
        assert not rep.equality
        a, b, c = rng.standard_normal(3)
        y2 = (c - a * x) / (b if abs(b) > 0.1 else 0.1)
        rep = wc.weighted_cbs_check(p, x, y2)
        assert rep.equality
        assert wc.combo_residual(x, y2, rep.combo) < 1e-9 * (np.linalg.norm(x) + np.linalg.norm(y2) + 1)


def test_constant_vector_gives_zero():
    assert wc.weighted_form([1, 2, 3], [4, 4, 4], [1, -2, 7]) == 0.0
    rep = wc.weighted_cbs_check([1, 2, 3], [4, 4, 4], [1, -2, 7])
    assert rep.rhs == 0.0 and rep.equality


def test_validation():
    with pytest.raises(CBSError):
        wc.weighted_form([1, 0, 1], [1, 2, 3], [1, 2, 3])
    with pytest.raises(DimensionMismatchError):
        wc.weighted_form([1, 1], [1, 2, 3], [1, 2, 3])


def test_integral_form_against_scipy_quad():
    rule = ii.QuadratureRule.gauss_legendre(16)
    pf, ff, gf = (lambda t: 1 + t * t), (lambda t: t**3 - t), (lambda t: np.exp(t))
    quad = lambda h: integrate.quad(h, 0, 1, epsabs=1e-13, epsrel=1e-13)[0]
    want = quad(pf) * quad(lambda t: pf(t) * ff(t) * gf(t)) - quad(lambda t: pf(t) * ff(t)) * quad(
        lambda t: pf(t) * gf(t)
    )
    got = wc.integral_weighted_form(rule.sample(pf), rule.sample(ff), rule.sample(gf))
    assert got == pytest.approx(want, rel=1e-12)


def test_integral_equality_for_affine_relation():
    rule = ii.QuadratureRule.gauss_legendre(16)
    p = rule.sample(lambda t: 2 + np.sin(t))
    f = rule.sample(lambda t: t**2)
    g = rule.sample(lambda t: 3 - 2 * t**2)
    rep = wc.integral_weighted_cbs_check(p, f, g)
    assert rep.equality
    assert wc.combo_residual(f.values, g.values, rep.combo) < 1e-12


def test_integral_grid_mismatch():
    r16 = ii.QuadratureRule.gauss_legendre(16)
    r8 = ii.QuadratureRule.gauss_legendre(8)
    one = lambda t: np.ones_like(t)
    with pytest.raises(DimensionMismatchError):
        wc.integral_weighted_form(r16.sample(one), r16.sample(one), r8.sample(one))
