"""Command-line front end.

Exit codes: 0 success, 1 bound or invariant violation, 2 usage or input error.
"""

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import elasticity as el
from . import strengthened as st
from . import suites
from .exceptions import CBSError

CSV_HEADER = ["case", "form", "nu", "lambda", "mu", "gamma2", "gamma", "kernel_u", "kernel_v", "method"]
BOUND_TOL = 1e-8
DEFAULT_SWEEP = "0:0.45:0.05"

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class InputError(CBSError):
    pass


def published_bound(dim, form):
    """Published upper bound on gamma^2 for (dim, form), or None."""
    if dim == 2 and form == "a":
        return 0.75
    if dim == 3 and form in ("a1", "a2"):
        return 0.9
    return None


def fmt(x):
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def parse_sweep(text):
    """``start:stop:step`` with an inclusive stop, or a single value."""
    try:
        parts = [float(p) for p in text.split(":")]
    except ValueError:
        raise InputError(f"bad sweep {text!r}; expected start:stop:step") from None
    if len(parts) == 1:
        return parts
    if len(parts) != 3 or parts[2] <= 0:
        raise InputError(f"bad sweep {text!r}; expected start:stop:step with step > 0")
    start, stop, step = parts
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None


def _field(obj, key, path):
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"{path}: missing field {key!r}")
    return obj[key]


def load_matrix(path):
    """Read a MatrixInput file: ``{"n", "entries" (row-major), "u_indices", "v_indices"}``."""
    obj = _load_json(path)
    n = _field(obj, "n", path)
    entries = _field(obj, "entries", path)
    if not isinstance(n, int) or n < 2:
        raise InputError(f"{path}: field 'n' must be an integer >= 2")
    if not isinstance(entries, list) or len(entries) != n * n:
        raise InputError(f"{path}: field 'entries' must hold n*n = {n * n} numbers")
    try:
        A = np.array(entries, dtype=float).reshape(n, n)
        part = st.BlockPartition(_field(obj, "u_indices", path), _field(obj, "v_indices", path))
        part.validate(n)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None
    return A, part


def load_mesh(path):
    """Read a MeshInput file: ``{"dim", "vertices", "elements"}``."""
    obj = _load_json(path)
    dim = _field(obj, "dim", path)
    if dim not in (2, 3):
        raise InputError(f"{path}: field 'dim' must be 2 or 3")
    verts = _field(obj, "vertices", path)
    elems = _field(obj, "elements", path)
    try:
        V = np.array(verts, dtype=float)
        if V.ndim != 2 or V.shape[1] != dim:
            raise InputError(f"{path}: 'vertices' must be a list of {dim}-coordinate points")
        E = np.array(elems, dtype=int)
        if E.ndim != 2 or E.shape[1] != dim + 1:
            raise InputError(f"{path}: 'elements' must be a list of {dim + 1}-index tuples")
        return el.Mesh(V, E)
    except el.DegenerateSimplexError:
        raise
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def write_report(rows, summary, out):
    """CSV rows plus a JSON summary; ``out`` names the CSV, the JSON goes next to it."""
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([r["case"], r.get("form", ""), fmt(r.get("nu")), fmt(r.get("lambda")),
                    fmt(r.get("mu")), fmt(r["gamma2"]), fmt(np.sqrt(max(r["gamma2"], 0.0))),
                    fmt(r["kernel_u"]), fmt(r["kernel_v"]), r["method"]])
    summary_text = json.dumps(summary, indent=2) + "\n"
    if out is None:
        sys.stdout.write(buf.getvalue())
        sys.stdout.write(summary_text)
        return
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(buf.getvalue(), encoding="utf-8", newline="")
    out.with_suffix(".json").write_text(summary_text, encoding="utf-8", newline="")


def _summary(rows, bound, seed):
    mx = max(r["gamma2"] for r in rows)
    ok = None if bound is None else bool(mx <= bound + BOUND_TOL)
    return {"max_gamma2": float(mx), "bound": bound, "bound_satisfied": ok, "seed": seed}


def _row(case, form, nu, material, res):
    return {"case": case, "form": form, "nu": nu,
            "lambda": None if material is None else material.lam,
            "mu": None if material is None else material.mu,
            "gamma2": res.gamma2, "kernel_u": res.kernel_dim_u, "kernel_v": res.kernel_dim_v,
            "method": res.method}


def _map_ordered(fn, items):
    n = int(os.environ.get("CBS_THREADS", "0") or 0)
    workers = n if n > 0 else (os.cpu_count() or 1)
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _materials(args):
    """List of (nu or None, Material) from --nu / --nu-sweep / --lam --mu."""
    if args.nu_sweep is not None:
        return [(nu, el.Material.from_engineering(args.E, nu)) for nu in parse_sweep(args.nu_sweep)]
    if args.nu is not None:
        return [(args.nu, el.Material.from_engineering(args.E, args.nu))]
    return [(None, el.Material(args.lam, args.mu))]


def random_simplex(rng, dim, min_quality=1e-3):
    """Random simplex in the unit box, redrawn until it is not nearly flat."""
    while True:
        X = rng.uniform(0.0, 1.0, size=(dim + 1, dim))
        h = np.max(np.linalg.norm(X[:, None] - X[None], axis=-1))
        vol = abs(el.signed_volume(X))
        if vol > min_quality * h**dim:
            return X


def _parse_vertices(text, dim):
    path = Path(text)
    obj = _load_json(path) if path.exists() else json.loads(text)
    if isinstance(obj, dict):
        obj = obj.get("vertices", obj)
    X = np.array(obj, dtype=float)
    if X.shape != (dim + 1, dim):
        raise InputError(f"--vertices must give {dim + 1} points in {dim}D, got shape {X.shape}")
    return X


def cmd_verify(args):
    names = suites.SUITES if args.suite == "all" else (args.suite,)
    start = time.perf_counter()
    for name in names:
        t0 = time.perf_counter()
        try:
            suites.run_suite(name, args.trials, args.seed)
        except suites.SuiteFailure as fail:
            print(f"FAIL {name}: {fail.check}", file=sys.stdout)
            print(str(fail), file=sys.stderr)
            return EXIT_VIOLATION
        print(f"PASS {name}: {args.trials} trials in {time.perf_counter() - t0:.2f} s")
    print(f"all suites passed in {time.perf_counter() - start:.2f} s (seed {args.seed})")
    return EXIT_OK


def cmd_gamma_matrix(args):
    A, part = load_matrix(args.input)
    res = st.compute_gamma(A, part, args.method, **_method_kwargs(args))
    rows = [_row("matrix", "", None, None, res)]
    status = EXIT_OK
    if args.method != "eigen":
        ex = st.gamma_exact(A, part)
        rows.append(_row("matrix", "", None, None, ex))
        if res.gamma2 > ex.gamma2 + 1e-10:
            print(f"ordering violated: {args.method} gamma2 {res.gamma2!r} > eigen {ex.gamma2!r}",
                  file=sys.stderr)
            status = EXIT_VIOLATION
    write_report(rows, _summary(rows, None, args.seed), args.out)
    return status


def _method_kwargs(args):
    if args.method == "sampling":
        return {"trials": args.trials, "seed": args.seed}
    if args.method == "alternating":
        return {"seed": args.seed}
    return {}


def cmd_gamma_element(args):
    dim, form = args.dim, args.form
    if args.vertices == "random":
        rng = np.random.Generator(np.random.Philox(args.seed))
        simplices = [(f"draw-{k}", random_simplex(rng, dim)) for k in range(args.draws)]
    elif args.vertices:
        simplices = [("element", _parse_vertices(args.vertices, dim))]
    else:
        simplices = [("reference", el.reference_simplex(dim))]
    cases = [(name, X, nu, m) for name, X in simplices for nu, m in _materials(args)]

    def run(case):
        name, X, nu, m = case
        return _row(name, form, nu, m, el.gamma_element(X, m, form, args.diagonal))

    rows = _map_ordered(run, cases)
    bound = published_bound(dim, form)
    summary = _summary(rows, bound, args.seed)
    write_report(rows, summary, args.out)
    return EXIT_VIOLATION if summary["bound_satisfied"] is False else EXIT_OK


def cmd_gamma_mesh(args):
    mesh = load_mesh(args.mesh)
    sweep = parse_sweep(args.nu_sweep)
    cases = [(k, nu) for k in range(len(mesh.elements)) for nu in sweep]

    def run(case):
        k, nu = case
        m = el.Material.from_engineering(args.E, nu)
        return _row(f"element-{k}", args.form, nu, m,
                    el.gamma_element(mesh.element_vertices(k), m, args.form, args.diagonal))

    rows = _map_ordered(run, cases)
    summary = _summary(rows, published_bound(mesh.dim, args.form), args.seed)
    write_report(rows, summary, args.out)
    return EXIT_VIOLATION if summary["bound_satisfied"] is False else EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="cbskit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run randomized property suites")
    v.add_argument("--suite", choices=suites.SUITES + ("all",), default="all")
    v.add_argument("--trials", type=_positive_int, default=1000)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("gamma-matrix", help="strengthened CBS constant of a matrix file")
    m.add_argument("input")
    m.add_argument("--method", choices=st.METHODS, default="eigen")
    m.add_argument("--trials", type=_positive_int, default=100000)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--out")
    m.set_defaults(func=cmd_gamma_matrix)

    e = sub.add_parser("gamma-element", help="gamma of one red-refined macro element")
    _element_options(e)
    e.add_argument("--vertices", help="JSON point list, a JSON file, or 'random'")
    e.add_argument("--draws", type=_positive_int, default=1, help="random simplices to draw")
    e.add_argument("--nu", type=float)
    e.add_argument("--nu-sweep")
    e.add_argument("--lam", type=float, default=1.0)
    e.add_argument("--mu", type=float, default=1.0)
    e.set_defaults(func=cmd_gamma_element)

    g = sub.add_parser("gamma-mesh", help="per-element gamma over a mesh file")
    g.add_argument("mesh")
    _element_options(g, with_dim=False)
    g.add_argument("--nu-sweep", default=DEFAULT_SWEEP)
    g.set_defaults(func=cmd_gamma_mesh)
    return p


def _element_options(sp, with_dim=True):
    if with_dim:
        sp.add_argument("--dim", type=int, choices=(2, 3), default=2)
    sp.add_argument("--form", choices=("a", "a1", "a2"), default="a")
    sp.add_argument("--E", type=float, default=1.0, help="Young's modulus for --nu inputs")
    sp.add_argument("--diagonal", type=int, choices=(0, 1, 2), default=0,
                    help="octahedron diagonal for 3D red refinement")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")


def _positive_int(text):
    k = int(text)
    if k < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return k


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CBSError as exc:
        print(f"cbskit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
