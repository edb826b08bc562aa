"""Acceptance criteria, each at its stated tolerance and time budget.

Every test appends one PASS/FAIL line, shown in the pytest terminal summary.
Timings exclude interpreter start-up and one-off JIT loading (a warm-up
call runs before the clock starts).
"""

import csv
import json
import time

import numpy as np
import pytest

from cbskit import cli
from cbskit import integralineq as ii
from cbskit import strengthened as st
from cbskit import suites
from cbskit import vectorcore as vc
from cbskit import weightedcbs as wc
from cbskit.elasticity import Material, gamma_element, reference_simplex

BOUND_2D = 0.75
BOUND_3D = 0.9
BOUND_TOL = 1e-8
SWEEP = "0:0.45:0.05"


@pytest.fixture(scope="module", autouse=True)
def warm_up():
    gamma_element(reference_simplex(2), Material(1.0, 1.0))
    gamma_element(reference_simplex(3), Material(1.0, 1.0))
    st.gamma_alternating(np.eye(3) + 0.1, [0])


def report(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return rows, json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))


def run_cli(argv, tmp_path, name):
    out = tmp_path / f"{name}.csv"
    code = cli.main(argv + ["--out", str(out)])
    rows, summary = report(out)
    return code, rows, summary


def test_criterion_1_right_triangle_sweep(tmp_path, acceptance_log):
    t0 = time.perf_counter()
    code, rows, summary = run_cli(["gamma-element", "--dim", "2", "--form", "a", "--nu-sweep", SWEEP],
                                  tmp_path, "c1")
    dt = time.perf_counter() - t0
    g = [float(r["gamma2"]) for r in rows]
    nus = [float(r["nu"]) for r in rows]
    ok = (code == 0 and len(rows) == 10 and np.allclose(nus, np.arange(10) * 0.05)
          and max(g) <= BOUND_2D + BOUND_TOL and summary["bound_satisfied"] is True and dt < 1.0)
    acceptance_log(1, ok, f"max gamma2 {max(g):.12f} over {len(g)} nu values (bound 0.75), {dt:.2f} s < 1 s")
    assert ok


def test_criterion_2_random_triangles(tmp_path, acceptance_log):
    t0 = time.perf_counter()
    code, rows, summary = run_cli(["gamma-element", "--dim", "2", "--form", "a", "--nu", "0.3",
                                   "--vertices", "random", "--draws", "100", "--seed", "11"], tmp_path, "c2")
    dt = time.perf_counter() - t0
    g = np.array([float(r["gamma2"]) for r in rows])
    ok = code == 0 and g.size == 100 and np.all(g <= BOUND_2D + BOUND_TOL) and dt < 5.0
    acceptance_log(2, ok, f"100 triangles, max gamma2 {g.max():.12f} (bound 0.75), {dt:.2f} s < 5 s")
    assert ok


def test_criterion_3_tetrahedra(tmp_path, acceptance_log):
    t0 = time.perf_counter()
    worst = {"a1": 0.0, "a2": 0.0}
    count = 0
    codes = []
    for diagonal in ("0", "1", "2"):
        for form, materials in (("a1", [[]]), ("a2", [[], ["--nu-sweep", SWEEP]])):
            for verts in ([], ["--vertices", "random", "--draws", "50", "--seed", "21"]):
                for mat in materials:
                    code, rows, summary = run_cli(
                        ["gamma-element", "--dim", "3", "--form", form, "--diagonal", diagonal] + verts + mat,
                        tmp_path, f"c3-{form}-{diagonal}-{len(verts)}-{len(mat)}")
                    codes.append(code == 0 and summary["bound_satisfied"] is True)
                    worst[form] = max(worst[form], summary["max_gamma2"])
                    count += len(rows)
    dt = time.perf_counter() - t0
    ok = all(codes) and max(worst.values()) <= BOUND_3D + BOUND_TOL and dt < 30.0
    acceptance_log(3, ok, f"{count} cases, max gamma2 a1 {worst['a1']:.15f}, a2 {worst['a2']:.12f} "
                          f"(bound 0.9), {dt:.2f} s < 30 s")
    assert ok


def test_criterion_4_oracle_equivalence(acceptance_log):
    rng = np.random.Generator(np.random.Philox(key=4))
    t0 = time.perf_counter()
    worst_alt = worst_gap = 0.0
    below = True
    for i in range(200):
        n = int(rng.integers(4, 13))
        A = suites.random_spd(rng, n)
        part = suites.random_partition(rng, n)
        ex = st.gamma_exact(A, part)
        alt = st.gamma_alternating(A, part, seed=i)
        smp = st.gamma_sampling(A, part, trials=100_000, seed=i)
        worst_alt = max(worst_alt, abs(alt.gamma2 - ex.gamma2))
        worst_gap = max(worst_gap, ex.gamma2 - smp.gamma2)
        below &= smp.gamma2 <= ex.gamma2 + 1e-12
    dt = time.perf_counter() - t0
    ok = worst_alt <= 1e-8 and below and worst_gap <= 5e-3 and dt < 30.0
    acceptance_log(4, ok, f"|alt - exact| <= {worst_alt:.1e}, sampling lower bound within {worst_gap:.2e}, "
                          f"{dt:.2f} s < 30 s")
    assert ok


def test_criterion_5_lagrange_identity(acceptance_log):
    rng = np.random.Generator(np.random.Philox(key=5))
    count = 100_000
    lengths = rng.integers(1, 33, size=count)
    X = rng.standard_normal((count, 32)) * 10.0 ** rng.uniform(-3, 3, size=(count, 1))
    Y = rng.standard_normal((count, 32))
    t0 = time.perf_counter()
    worst_id = 0.0
    worst_cbs = 0.0
    for n, x, y in zip(lengths, X, Y):
        x, y = x[:n], y[:n]
        gap = vc.cbs_gap(x, y).gap
        scale = np.dot(x, x) * np.dot(y, y)
        worst_id = max(worst_id, abs(vc.lagrange_gap(x, y) - 2 * gap) / (2 * scale))
        worst_cbs = min(worst_cbs, gap / scale)
    dt = time.perf_counter() - t0
    ok = worst_id <= 1e-10 and worst_cbs >= -1e-12 and dt < 5.0
    acceptance_log(5, ok, f"10^5 pairs, identity rel err {worst_id:.1e}, min gap/scale {worst_cbs:.1e}, "
                          f"{dt:.2f} s < 5 s")
    assert ok


def test_criterion_6_weighted(acceptance_log):
    rng = np.random.Generator(np.random.Philox(key=6))
    t0 = time.perf_counter()
    holds = 0
    for _ in range(10_000):
        n = int(rng.integers(2, 33))
        rep = wc.weighted_cbs_check(rng.uniform(0.1, 10, n), rng.standard_normal(n), rng.standard_normal(n))
        holds += rep.gap >= -1e-10 * rep.scale
    detected = 0
    worst_res = 0.0
    for _ in range(1000):
        n = int(rng.integers(3, 33))
        p = rng.uniform(0.1, 10, n)
        x = rng.standard_normal(n)
        a, b, c = rng.standard_normal(3)
        b = b if abs(b) > 0.1 else 0.1
        y = (c - a * x) / b
        rep = wc.weighted_cbs_check(p, x, y)
        detected += rep.equality
        if rep.equality:
            worst_res = max(worst_res, wc.combo_residual(x, y, rep.combo))
    rule = ii.QuadratureRule.gauss_legendre(16)
    integral_holds = 0
    for _ in range(1000):
        p = rule.sample(suites.nonneg_poly(rng, int(rng.integers(0, 6))))
        if np.any(p.values <= 0):
            p = ii.SampledFunction(rule, p.values + 0.1)
        f = rule.sample(suites.signed_poly(rng, int(rng.integers(0, 6))))
        g = rule.sample(suites.signed_poly(rng, int(rng.integers(0, 6))))
        rep = wc.integral_weighted_cbs_check(p, f, g)
        integral_holds += rep.gap >= -1e-10 * rep.scale
    dt = time.perf_counter() - t0
    ok = holds == 10_000 and detected == 1000 and worst_res < 1e-9 and integral_holds == 1000 and dt < 10.0
    acceptance_log(6, ok, f"discrete {holds}/10000, equality {detected}/1000 (max residual {worst_res:.1e}), "
                          f"integral {integral_holds}/1000, {dt:.2f} s < 10 s")
    assert ok


def test_criterion_7_hoelder_minkowski(acceptance_log):
    rng = np.random.Generator(np.random.Philox(key=7))
    rule = ii.QuadratureRule.gauss_legendre(16)
    t0 = time.perf_counter()
    min_gap = np.inf
    worst_path = 0.0
    for _ in range(1000):
        f = rule.sample(suites.nonneg_poly(rng, int(rng.integers(0, 6))))
        g = rule.sample(suites.nonneg_poly(rng, int(rng.integers(0, 6))))
        for p in (1.5, 2.0, 3.0):
            h = ii.holder_check(f, g, ii.ConjugatePair(p))
            m = ii.minkowski_check(f, g, p)
            min_gap = min(min_gap, h.gap, m.gap)
        h2 = ii.holder_check(f, g, ii.ConjugatePair(2.0))
        c2 = ii.integral_cbs_check(f, g)
        worst_path = max(worst_path, abs(h2.lhs - c2.lhs), abs(h2.rhs - c2.rhs))
    dt = time.perf_counter() - t0
    ok = min_gap >= -1e-9 and worst_path <= 1e-12 and dt < 10.0
    acceptance_log(7, ok, f"min gap {min_gap:.2e}, p=2 vs integral CBS {worst_path:.1e}, {dt:.2f} s < 10 s")
    assert ok


def test_criterion_8_property_suites(capsys, acceptance_log):
    t0 = time.perf_counter()
    codes = []
    outputs = []
    for _ in range(2):
        codes.append(cli.main(["verify", "--suite", "all", "--trials", "1000", "--seed", "1"]))
        out = capsys.readouterr().out
        outputs.append([line.split(" in ")[0] for line in out.splitlines()])
    dt = time.perf_counter() - t0
    ok = codes == [0, 0] and outputs[0] == outputs[1] and dt < 120.0
    acceptance_log(8, ok, f"verify --suite all --trials 1000 --seed 1 exit {codes}, identical reruns, "
                          f"{dt:.2f} s for two runs")
    assert ok
