"""P1 linear elasticity on triangles and tetrahedra, two-level hierarchical
splitting of the red-refined macro element, and its strengthened CBS constant.

DOF ordering is node-major, component-minor: DOF ``d*k + i`` is displacement
component ``i`` at node ``k``. In a macro element the parent vertices come
first, then the edge midpoints in lexicographic edge order.

Forms:

* ``a``   -- ``lambda div u div v + 2 mu eps(u):eps(v)``
* ``a1``  -- ``div u div v``
* ``a2``  -- ``c(u):c(v)`` with ``c(u) = lambda tr(eps(u)) I + 2 mu eps(u)``
* ``eps`` -- ``eps(u):eps(v)`` (strain Gram part of ``a``)
"""

import hashlib
import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Tuple

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import CBSError, DegenerateSimplexError
from .strengthened import BlockPartition, GammaResult, gamma_exact
from .symlin import RANK_TOL

FORMS = ("a", "a1", "a2", "eps")
#: (point A, point B) edge pairs whose midpoints span the octahedron diagonal
OCTAHEDRON_DIAGONALS = (((0, 2), (1, 3)), ((0, 1), (2, 3)), ((0, 3), (1, 2)))
DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class Material:
    """Isotropic Lame moduli; ``mu > 0``, ``lam >= 0``."""

    lam: float
    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise CBSError(f"shear modulus mu must be > 0, got {self.mu!r}")
        if not self.lam >= 0:
            raise CBSError(f"Lame lambda must be >= 0, got {self.lam!r}")

    @classmethod
    def from_engineering(cls, E, nu):
        if not 0 <= nu < 0.5:
            raise CBSError(f"Poisson ratio must be in [0, 0.5), got {nu!r}")
        if not E > 0:
            raise CBSError(f"Young's modulus must be > 0, got {E!r}")
        return cls(E * nu / ((1 + nu) * (1 - 2 * nu)), E / (2 * (1 + nu)))

    def scaled(self, factor):
        return Material(self.lam * factor, self.mu * factor)


def reference_simplex(dim):
    return np.vstack([np.zeros(dim), np.eye(dim)])


def signed_volume(vertices):
    X = np.asarray(vertices, dtype=float)
    d = X.shape[1]
    return float(np.linalg.det((X[1:] - X[0]).T)) / math.factorial(d)


def _check_simplex(vertices):
    X = np.asarray(vertices, dtype=float)
    if X.ndim != 2 or X.shape[1] not in (2, 3) or X.shape[0] != X.shape[1] + 1:
        raise CBSError(f"expected a triangle (3x2) or tetrahedron (4x3), got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise CBSError("simplex coordinates must be finite")
    d = X.shape[1]
    h = np.max(np.linalg.norm(X[:, None] - X[None], axis=-1))
    vol = signed_volume(X)
    if abs(vol) <= DEGENERACY_TOL * h**d:
        raise DegenerateSimplexError(f"degenerate simplex: volume {vol:.3e}, diameter {h:.3e}")
    return X, vol


def barycentric_gradients(vertices):
    """Gradients of the P1 hat functions (rows) and the simplex volume."""
    X, vol = _check_simplex(vertices)
    d = X.shape[1]
    T = np.hstack([np.ones((d + 1, 1)), X])
    return np.linalg.inv(T)[1:].T, abs(vol)


def _dof_tensors(G):
    # strain tensor and divergence of every basis displacement phi_k e_i
    nn, d = G.shape
    eps = np.zeros((nn * d, d, d))
    div = np.zeros(nn * d)
    for k in range(nn):
        for i in range(d):
            g = np.zeros((d, d))
            g[i, :] = G[k]
            eps[k * d + i] = 0.5 * (g + g.T)
            div[k * d + i] = G[k, i]
    return eps, div


@dataclass(frozen=True)
class ElementStiffness:
    matrix: np.ndarray
    form: str
    dim: int


def element_stiffness(vertices, material=None, form="a"):
    """Exact P1 element matrix of the given bilinear form.

    Strains are constant on a P1 simplex, so each matrix is the volume times
    a constant Gram matrix of per-DOF strain (or stress) tensors.
    """
    if form not in FORMS:
        raise CBSError(f"unknown form {form!r}; expected one of {FORMS}")
    G, vol = barycentric_gradients(vertices)
    d = G.shape[1]
    eps, div = _dof_tensors(G)
    if form == "a1":
        K = vol * np.outer(div, div)
    elif form == "eps":
        K = vol * np.einsum("pij,qij->pq", eps, eps)
    else:
        if material is None:
            raise CBSError(f"form {form!r} needs a Material")
        if form == "a":
            K = vol * (material.lam * np.outer(div, div)
                       + 2.0 * material.mu * np.einsum("pij,qij->pq", eps, eps))
        else:
            stress = material.lam * div[:, None, None] * np.eye(d) + 2.0 * material.mu * eps
            K = vol * np.einsum("pij,qij->pq", stress, stress)
    K = 0.5 * (K + K.T)
    return ElementStiffness(K, form, d)


def rigid_body_modes(points):
    """Translations and infinitesimal rotations sampled at ``points`` (columns)."""
    P = np.asarray(points, dtype=float)
    n, d = P.shape
    modes = []
    for i in range(d):
        t = np.zeros((n, d))
        t[:, i] = 1.0
        modes.append(t.ravel())
    for i, j in itertools.combinations(range(d), 2):
        r = np.zeros((n, d))
        r[:, i] = -P[:, j]
        r[:, j] = P[:, i]
        modes.append(r.ravel())
    return np.array(modes).T


@dataclass(frozen=True)
class RedRefinement:
    """Points of the refined simplex and its children (index tuples into ``points``)."""

    points: np.ndarray
    children: List[Tuple[int, ...]]
    edges: List[Tuple[int, int]]
    diagonal: int = 0


def _edge_midpoint_index(edges, nv):
    index = {e: nv + k for k, e in enumerate(edges)}
    return lambda i, j: index[(min(i, j), max(i, j))]


def red_refine(vertices, diagonal=0):
    """Uniform refinement through the edge midpoints.

    A triangle splits into 4 congruent children. A tetrahedron splits into 4
    corner tetrahedra and 4 tetrahedra around one octahedron diagonal;
    ``diagonal`` picks it from :data:`OCTAHEDRON_DIAGONALS` (0 joins the
    midpoints of edges v0v2 and v1v3). Every child is positively oriented.
    """
    X, _ = _check_simplex(vertices)
    d = X.shape[1]
    nv = d + 1
    edges = list(itertools.combinations(range(nv), 2))
    points = np.vstack([X] + [(X[i] + X[j]) / 2 for i, j in edges])
    m = _edge_midpoint_index(edges, nv)
    if d == 2:
        children = [(0, m(0, 1), m(0, 2)), (m(0, 1), 1, m(1, 2)),
                    (m(0, 2), m(1, 2), 2), (m(0, 1), m(1, 2), m(0, 2))]
    else:
        if diagonal not in (0, 1, 2):
            raise CBSError(f"octahedron diagonal must be 0, 1 or 2, got {diagonal!r}")
        children = [(0, m(0, 1), m(0, 2), m(0, 3)), (m(0, 1), 1, m(1, 2), m(1, 3)),
                    (m(0, 2), m(1, 2), 2, m(2, 3)), (m(0, 3), m(1, 3), m(2, 3), 3)]
        e1, e2 = OCTAHEDRON_DIAGONALS[diagonal]
        p, q = m(*e1), m(*e2)
        edge_of = {m(*e): set(e) for e in edges}
        ring = [r for r in edge_of if r not in (p, q)]
        # equator of the octahedron: consecutive midpoints share a parent vertex
        cycle = [ring[0]]
        while len(cycle) < 4:
            cycle.append(next(r for r in ring if r not in cycle and edge_of[r] & edge_of[cycle[-1]]))
        children += [(p, q, cycle[k], cycle[(k + 1) % 4]) for k in range(4)]
    oriented = []
    for c in children:
        if signed_volume(points[list(c)]) < 0:
            c = (c[1], c[0]) + tuple(c[2:])
        oriented.append(tuple(c))
    return RedRefinement(points, oriented, edges, diagonal)


def assemble(points, elements, material, form):
    """Sum element matrices over shared nodes (dense, node-major DOFs)."""
    points = np.asarray(points, dtype=float)
    d = points.shape[1]
    A = np.zeros((points.shape[0] * d,) * 2)
    for el in elements:
        K = element_stiffness(points[list(el)], material, form).matrix
        idx = (np.asarray(el)[:, None] * d + np.arange(d)).ravel()
        A[np.ix_(idx, idx)] += K
    return A


def hierarchical_transform(dim):
    """Change of basis ``J`` from two-level hierarchical to nodal coefficients.

    A coarse vertex function equals the fine hat at the vertex plus half the
    fine hats at the midpoints of its edges, so ``J = [[I, 0], [P, I]]`` with
    ``P`` holding 1/2 on each midpoint's two end vertices, per component.
    """
    nv = dim + 1
    edges = list(itertools.combinations(range(nv), 2))
    n = (nv + len(edges)) * dim
    J = np.eye(n)
    for k, (i, j) in enumerate(edges):
        for c in range(dim):
            J[(nv + k) * dim + c, i * dim + c] = 0.5
            J[(nv + k) * dim + c, j * dim + c] = 0.5
    return J


@dataclass(frozen=True)
class HierarchicalSplit:
    matrix: np.ndarray
    partition: BlockPartition
    fine_matrix: np.ndarray
    transform: np.ndarray
    refinement: RedRefinement


def hierarchical_split(vertices, material=None, form="a", diagonal=0):
    """Macro-element matrix in the two-level hierarchical basis.

    Returns ``A_hb = J^T A_fine J`` with U = parent-vertex DOFs (coarse) and
    V = edge-midpoint DOFs (hierarchical fine).
    """
    ref = red_refine(vertices, diagonal)
    d = ref.points.shape[1]
    A_fine = assemble(ref.points, ref.children, material, form)
    J = hierarchical_transform(d)
    A_hb = J.T @ A_fine @ J
    A_hb = 0.5 * (A_hb + A_hb.T)
    ncoarse = (d + 1) * d
    part = BlockPartition(tuple(range(ncoarse)), tuple(range(ncoarse, A_hb.shape[0])))
    return HierarchicalSplit(A_hb, part, A_fine, J, ref)


def geometry_hash(vertices):
    X = np.ascontiguousarray(np.asarray(vertices, dtype=float))
    return hashlib.sha256(X.tobytes()).hexdigest()[:16]


def gamma_element(vertices, material=None, form="a", diagonal=0, rank_tol=RANK_TOL):
    """Strengthened CBS constant of one red-refined macro element."""
    split = hierarchical_split(vertices, material, form, diagonal)
    res = gamma_exact(split.matrix, split.partition, rank_tol=rank_tol)
    diag = dict(res.diagnostics)
    diag.update(form=form, diagonal=diagonal, geometry=geometry_hash(vertices),
                lam=None if material is None else material.lam,
                mu=None if material is None else material.mu)
    return replace(res, diagnostics=diag)


@dataclass(frozen=True)
class Mesh:
    """Simplicial mesh; elements are reoriented on ingest to positive volume."""

    vertices: np.ndarray
    elements: np.ndarray = field(repr=False)

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] not in (2, 3):
            raise CBSError(f"vertices must have shape (n, 2) or (n, 3), got {V.shape}")
        d = V.shape[1]
        E = np.array(self.elements, dtype=int).reshape(-1, d + 1)
        if E.size == 0:
            raise CBSError("mesh has no elements")
        if E.min() < 0 or E.max() >= V.shape[0]:
            raise CBSError("element vertex index out of range")
        for k, el in enumerate(E):
            try:
                _, vol = _check_simplex(V[el])
            except DegenerateSimplexError as exc:
                raise DegenerateSimplexError(f"element {k}: {exc}", element_index=k) from None
            if vol < 0:
                E[k, [0, 1]] = E[k, [1, 0]]
        V.setflags(write=False)
        E.setflags(write=False)
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "elements", E)

    @property
    def dim(self):
        return self.vertices.shape[1]

    def element_vertices(self, k):
        return self.vertices[self.elements[k]]


def _thread_count():
    n = int(os.environ.get("CBS_THREADS", "0") or 0)
    return n if n > 0 else (os.cpu_count() or 1)


@dataclass(frozen=True)
class MeshGamma:
    results: List[GammaResult]
    max_gamma2: float
    argmax: int


def gamma_mesh(mesh, material=None, form="a", diagonal=0, rank_tol=RANK_TOL):
    """Macro-element gamma for every element; results in element order."""
    def one(k):
        return gamma_element(mesh.element_vertices(k), material, form, diagonal, rank_tol)

    n = len(mesh.elements)
    with ThreadPoolExecutor(max_workers=min(_thread_count(), n)) as pool:
        results = list(pool.map(one, range(n)))
    g = [r.gamma2 for r in results]
    k = int(np.argmax(g))
    return MeshGamma(results, g[k], k)


class ElementGamma(BaseEstimator):
    """Per-element strengthened CBS constants for a batch of simplices.

    ``fit(X)`` takes an array of shape ``(n_elements, dim + 1, dim)`` (or a
    single simplex) and stores ``gamma2_`` per element and ``max_gamma2_``.
    Material is given by ``lam``/``mu`` or, when ``nu`` is set, by ``E`` and
    ``nu``.
    """

    def __init__(self, form="a", lam=1.0, mu=1.0, E=1.0, nu=None, diagonal=0,
                 rank_tol=RANK_TOL):
        self.form = form
        self.lam = lam
        self.mu = mu
        self.E = E
        self.nu = nu
        self.diagonal = diagonal
        self.rank_tol = rank_tol

    def _material(self):
        if self.nu is not None:
            return Material.from_engineering(self.E, self.nu)
        return Material(self.lam, self.mu)

    def _compute(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 2:
            X = X[None]
        if X.ndim != 3 or X.shape[1] != X.shape[2] + 1 or X.shape[2] not in (2, 3):
            raise CBSError(f"expected simplices of shape (n, dim + 1, dim), got {X.shape}")
        m = self._material()
        return [gamma_element(x, m, self.form, self.diagonal, self.rank_tol) for x in X]

    def fit(self, X, y=None):
        self.results_ = self._compute(X)
        self.gamma2_ = np.array([r.gamma2 for r in self.results_])
        self.max_gamma2_ = float(self.gamma2_.max())
        return self

    def transform(self, X):
        """gamma^2 per simplex as a column, without touching fitted state."""
        return np.array([[r.gamma2] for r in self._compute(X)])
