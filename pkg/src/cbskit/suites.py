"""Randomized property suites driven by ``cbskit verify``.

Trial ``i`` of a suite draws from the Philox stream with key ``seed`` and
counter ``i << 64``, so any failure is reproducible from ``(suite, seed, i)``
alone and independent of how trials are scheduled.
"""

from dataclasses import dataclass, field

import numpy as np

from . import integralineq as ii
from . import strengthened as st
from . import vectorcore as vc
from . import weightedcbs as wc

SUITES = ("core", "weighted", "integral", "strengthened")


@dataclass
class SuiteFailure(AssertionError):
    suite: str
    seed: int
    trial: int
    check: str
    inputs: dict = field(default_factory=dict)

    def __str__(self):
        parts = [f"suite={self.suite} seed={self.seed} trial={self.trial} check={self.check}"]
        for k, v in self.inputs.items():
            arr = np.asarray(v)
            parts.append(f"  {k} = {np.array2string(arr, precision=17, threshold=10**6)}")
        return "\n".join(parts)


def trial_rng(seed, trial):
    return np.random.Generator(np.random.Philox(counter=int(trial) << 64, key=int(seed)))


def random_spd(rng, n, ridge=0.5):
    G = rng.standard_normal((n, n))
    return G @ G.T + ridge * np.eye(n)


def random_partition(rng, n):
    k = int(rng.integers(1, n))
    u = np.sort(rng.choice(n, size=k, replace=False))
    return st.BlockPartition.complement(u, n)


def nonneg_poly(rng, degree, interval=(0.0, 1.0)):
    """Random nonnegative polynomial on ``interval``: a Bernstein sum with
    nonnegative coefficients, returned as a callable."""
    from math import comb

    a, b = interval
    c = rng.uniform(0.0, 2.0, size=degree + 1)

    def f(x):
        t = (np.asarray(x, dtype=float) - a) / (b - a)
        return sum(c[k] * comb(degree, k) * t**k * (1 - t) ** (degree - k) for k in range(degree + 1))

    return f


def signed_poly(rng, degree):
    coef = rng.standard_normal(degree + 1)
    return lambda x: np.polyval(coef, x)


def _rel(a, b, scale):
    return abs(a - b) <= scale


def core_trial(rng):
    n = int(rng.integers(1, 65))
    s = 10.0 ** rng.uniform(-3, 3)
    x = s * rng.standard_normal(n)
    y = rng.standard_normal(n)
    z = rng.standard_normal(n)
    inputs = {"x": x, "y": y, "z": z}
    gap, eq = vc.cbs_gap(x, y)
    scale = np.dot(x, x) * np.dot(y, y)
    if gap < -1e-12 * scale:
        return "cbs_gap nonnegative", inputs
    if not _rel(vc.lagrange_gap(x, y), 2 * gap, 1e-10 * 2 * scale):
        return "lagrange identity", inputs
    if np.any(y) and vc.discriminant_min(x, y) < -1e-12 * np.dot(x, x):
        return "discriminant form", inputs
    if vc.inner_product(x, y) != vc.inner_product(y, x):
        return "inner product symmetry", inputs
    add_scale = 1e-12 * (vc.norm(x) + vc.norm(z)) * vc.norm(y)
    if not _rel(vc.inner_product(x + z, y), vc.inner_product(x, y) + vc.inner_product(z, y), add_scale):
        return "inner product additivity", inputs
    if vc.inner_product(x, x) < 0 or (vc.inner_product(x, x) == 0) != (not np.any(x)):
        return "inner product positivity", inputs
    lhs, rhs = vc.triangle_check(x, y)
    if lhs > rhs + 1e-12 * rhs:
        return "triangle inequality", inputs
    # collinear partner: equality flag and angle in {0, pi}
    lam = rng.uniform(0.1, 10) * rng.choice([-1.0, 1.0])
    if np.any(x):
        _, eq_c = vc.cbs_gap(x, lam * x)
        th = vc.angle(x, lam * x)
        if not eq_c or min(th, np.pi - th) > 1e-6:
            return "collinear equality", inputs
        if n >= 2 and np.any(y):
            th = vc.angle(x, y)
            if eq != (min(th, np.pi - th) <= 1e-6):
                return "equality flag vs angle", inputs
    a = rng.uniform(0.01, 10, size=n)
    am, gm, hm = vc.mean_chain(a)
    if not (am >= gm * (1 - 1e-12) and gm >= hm * (1 - 1e-12)):
        return "mean chain ordering", {"a": a}
    return None


def weighted_trial(rng):
    n = int(rng.integers(2, 33))
    p = rng.uniform(0.1, 10.0, size=n)
    x = rng.standard_normal(n)
    y = rng.standard_normal(n)
    inputs = {"p": p, "x": x, "y": y}
    rep = wc.weighted_cbs_check(p, x, y)
    if rep.gap < -1e-10 * rep.scale:
        return "weighted CBS inequality", inputs
    xx = wc.weighted_form(p, x, x)
    if xx < -1e-12 * p.sum() ** 2 * np.dot(x, x):
        return "weighted form semidefinite", inputs
    c = rng.standard_normal()
    sc = 1e-10 * max(np.sqrt(max(xx, 0) * max(wc.weighted_form(p, y, y), 0)), 1e-300)
    if not _rel(wc.weighted_form(p, x + c, y), rep.lhs, sc):
        return "shift invariance", inputs
    ones = np.ones(n)
    plain = n * np.dot(x, y) - x.sum() * y.sum()
    if not _rel(wc.weighted_form(ones, x, y), plain, 1e-10 * n * np.linalg.norm(x) * np.linalg.norm(y)):
        return "unit-weight reduction", inputs
    if abs(wc.weighted_form(p, np.full(n, c), y)) > 1e-12 * p.sum() ** 2 * abs(c) * np.abs(y).max():
        return "constant vector", inputs
    # constructed equality: a x + b y2 = c
    a, b, cc = rng.standard_normal(3)
    b = b if abs(b) > 0.1 else 0.1
    y2 = (cc - a * x) / b
    rep = wc.weighted_cbs_check(p, x, y2)
    if not rep.equality:
        return "equality detection", {"p": p, "x": x, "y": y2}
    res = wc.combo_residual(x, y2, rep.combo)
    ca, cb, cc2 = rep.combo
    if res > 1e-9 * (abs(ca) * np.linalg.norm(x) + abs(cb) * np.linalg.norm(y2) + abs(cc2) * np.sqrt(n)):
        return "combo residual", {"p": p, "x": x, "y": y2}
    # quadrature consistency: integral form equals the discrete form on p(t_i) w_i
    rule = ii.QuadratureRule.gauss_legendre(8)
    pf = ii.SampledFunction(rule, 1.0 + rule.nodes**2)
    f = rule.sample(signed_poly(rng, 5))
    g = rule.sample(signed_poly(rng, 5))
    integ = wc.integral_weighted_form(pf, f, g)
    disc = wc.weighted_form(pf.values * rule.weights, f.values, g.values)
    ff = wc.integral_weighted_form(pf, f, f)
    gg = wc.integral_weighted_form(pf, g, g)
    if not _rel(integ, disc, 1e-12 * max(np.sqrt(abs(ff * gg)), abs(integ), 1e-300) * 10):
        return "quadrature consistency", {"f": f.values, "g": g.values}
    rep = wc.integral_weighted_cbs_check(pf, f, g)
    if rep.gap < -1e-10 * rep.scale:
        return "integral weighted CBS", {"f": f.values, "g": g.values}
    return None


def integral_trial(rng):
    rule = ii.QuadratureRule.gauss_legendre(16)
    fine = ii.QuadratureRule.gauss_legendre(32)
    deg_f, deg_g = rng.integers(0, 5, size=2)
    fc, gc = nonneg_poly(rng, deg_f), nonneg_poly(rng, deg_g)
    f, g = rule.sample(fc), rule.sample(gc)
    inputs = {"f": f.values, "g": g.values}
    for p in (1.5, 2.0, 3.0):
        pair = ii.ConjugatePair(p)
        if abs(1 / pair.p + 1 / pair.q - 1) > 1e-15:
            return "conjugate pair", inputs
        if not ii.holder_check(f, g, pair).holds():
            return f"hoelder p={p}", inputs
        if not ii.minkowski_check(f, g, p).holds():
            return f"minkowski p={p}", inputs
        lhs, rhs = ii.crude_power_bound(f, g, p)
        if lhs > rhs:
            return f"crude bound p={p}", inputs
    h2 = ii.holder_check(f, g, ii.ConjugatePair(2.0))
    c2 = ii.integral_cbs_check(f, g)
    tol = 1e-12 * max(c2.rhs, 1.0)
    if not (_rel(h2.lhs, c2.lhs, tol) and _rel(h2.rhs, c2.rhs, tol)):
        return "hoelder p=2 vs integral CBS", inputs
    # polynomial integrands of degree <= 8 are exact on both rules
    h2f = ii.holder_check(fine.sample(fc), fine.sample(gc), ii.ConjugatePair(2.0))
    if not (_rel(h2.lhs, h2f.lhs, 1e-10 * h2f.lhs) and _rel(h2.rhs, h2f.rhs, 1e-10 * h2f.rhs)):
        return "quadrature doubling", inputs
    x, y = rng.uniform(0, 3, size=2)
    pair = ii.ConjugatePair(rng.uniform(1.1, 5))
    yc = ii.young_check(x, y, pair)
    if yc.lhs > yc.rhs * (1 + 1e-12):
        return "young inequality", {"x": x, "y": y, "p": pair.p}
    return None


def strengthened_trial(rng):
    n = int(rng.integers(2, 9))
    A = random_spd(rng, n)
    part = random_partition(rng, n)
    inputs = {"A": A, "u_indices": part.u_indices}
    ex = st.gamma_exact(A, part)
    alt = st.gamma_alternating(A, part, seed=int(rng.integers(2**31)))
    smp = st.gamma_sampling(A, part, trials=2000, seed=int(rng.integers(2**31)))
    if not 0 <= ex.gamma2 <= 1 + 1e-10:
        return "gamma2 range", inputs
    if abs(alt.gamma2 - ex.gamma2) > 1e-8:
        return "alternating vs exact", inputs
    if not smp.gamma2 <= alt.gamma2 + 1e-10 <= ex.gamma2 + 2e-10:
        return "ordering sampling <= alternating <= exact", inputs
    if abs(st.gamma_exact(A, part.swapped()).gamma2 - ex.gamma2) > 1e-10:
        return "U/V symmetry", inputs
    S = np.zeros((n, n))
    for block in (part.u_indices, part.v_indices):
        k = len(block)
        S[np.ix_(block, block)] = rng.standard_normal((k, k)) + 2 * np.sqrt(k) * np.eye(k)
    scaled = st.gamma_exact(S.T @ A @ S, part).gamma2
    if abs(scaled - ex.gamma2) > 1e-8 * max(ex.gamma2, 1e-300) and abs(scaled - ex.gamma2) > 1e-12:
        return "block scaling invariance", inputs
    A11, A12, A22 = part.blocks(A)
    r = st.energy_ratio(A11, A12, A22, ex.u_star, ex.v_star)
    if ex.gamma2 > 0 and abs(r - ex.gamma2) > 1e-8 * ex.gamma2:
        return "extremal pair certificate", inputs
    if not st.strengthened_check(A, part, ex, trials=200, seed=int(rng.integers(2**31))):
        return "strengthened inequality with exact gamma", inputs
    return None


TRIALS = {
    "core": core_trial,
    "weighted": weighted_trial,
    "integral": integral_trial,
    "strengthened": strengthened_trial,
}


def run_suite(name, trials, seed):
    """Run ``trials`` trials; raise :class:`SuiteFailure` on the first failing check."""
    fn = TRIALS[name]
    for i in range(trials):
        out = fn(trial_rng(seed, i))
        if out is not None:
            check, inputs = out
            raise SuiteFailure(name, seed, i, check, inputs)
    return trials
