"""Strengthened CBS constant of a block-partitioned SPSD matrix.

For ``A = [[A11, A12], [A21, A22]]`` split along coordinate blocks U and V,

    gamma^2 = sup (u^T A12 v)^2 / ((u^T A11 u)(v^T A22 v)),

the sup running over vectors with nonzero energy. :func:`gamma_exact`
computes it as the top eigenvalue of the pencil ``(A21 A11^+ A12, A22)``;
:func:`gamma_alternating` and :func:`gamma_sampling` are independent
estimators of the same quantity used as cross-checks.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import scipy.linalg
from sklearn.base import BaseEstimator

from ._validation import check_random_state, check_symmetric
from .exceptions import CBSError, InconsistentPencilError, NotPositiveSemidefiniteError
from .symlin import (
    PSD_TOL,
    RANK_TOL,
    _pencil_max,
    cholesky_spd,
    eigen_sym,
    pseudo_inverse,
    range_basis,
)

logger = logging.getLogger(__name__)

NEAR_ONE = 1e-8
METHODS = ("eigen", "alternating", "sampling")


@dataclass(frozen=True)
class BlockPartition:
    """Disjoint, covering, nonempty index blocks ``u_indices`` / ``v_indices``."""

    u_indices: Tuple[int, ...]
    v_indices: Tuple[int, ...]

    def __post_init__(self):
        u = tuple(int(i) for i in self.u_indices)
        v = tuple(int(i) for i in self.v_indices)
        if not u or not v:
            raise CBSError("both index blocks must be nonempty")
        if len(set(u)) != len(u) or len(set(v)) != len(v):
            raise CBSError("index blocks contain duplicates")
        if set(u) & set(v):
            raise CBSError(f"index blocks overlap at {sorted(set(u) & set(v))}")
        object.__setattr__(self, "u_indices", u)
        object.__setattr__(self, "v_indices", v)

    @classmethod
    def complement(cls, u_indices, n):
        u = sorted(int(i) for i in u_indices)
        return cls(tuple(u), tuple(i for i in range(n) if i not in set(u)))

    @property
    def n(self):
        return len(self.u_indices) + len(self.v_indices)

    def validate(self, n):
        if sorted(self.u_indices + self.v_indices) != list(range(n)):
            raise CBSError(f"index blocks do not cover 0..{n - 1} exactly")
        return self

    def swapped(self):
        return BlockPartition(self.v_indices, self.u_indices)

    def blocks(self, A):
        u, v = np.array(self.u_indices), np.array(self.v_indices)
        return A[np.ix_(u, u)], A[np.ix_(u, v)], A[np.ix_(v, v)]


@dataclass(frozen=True)
class GammaResult:
    gamma2: float
    u_star: Optional[np.ndarray]
    v_star: Optional[np.ndarray]
    kernel_dim_u: int
    kernel_dim_v: int
    method: str
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def gamma(self):
        return float(np.sqrt(max(self.gamma2, 0.0)))


def energy_ratio(A11, A12, A22, u, v):
    """``(u^T A12 v)^2 / ((u^T A11 u)(v^T A22 v))`` for one pair, ``nan`` on a zero denominator."""
    den = float(u @ A11 @ u) * float(v @ A22 @ v)
    if den <= 0:
        return float("nan")
    return float(u @ A12 @ v) ** 2 / den


def _prepare(A, part, psd_tol=PSD_TOL):
    A = check_symmetric(A)
    if isinstance(part, BlockPartition):
        part.validate(A.shape[0])
    else:
        part = BlockPartition.complement(part, A.shape[0]).validate(A.shape[0])
    dec = eigen_sym(A)
    lmax = dec.lambda_max
    if dec.eigenvalues[0] < -psd_tol * lmax:
        raise NotPositiveSemidefiniteError(
            f"A is indefinite: lambda_min {dec.eigenvalues[0]:.3e}, lambda_max {lmax:.3e}"
        )
    return A, part, float(dec.eigenvalues[0]), lmax


def gamma_exact(A, part, rank_tol=RANK_TOL, psd_tol=PSD_TOL):
    """Optimal strengthened CBS constant via a deflated generalized eigenproblem.

    The kernel of ``A11`` is removed first (``A11^+ = W W^T`` with ``W``
    whitening its range), which makes ``B = (W^T A12)^T (W^T A12)`` exactly
    semidefinite; the kernel of ``A22`` is then deflated from the pencil
    ``(B, A22)``. When either effective subspace is empty ``gamma2 = 0``.

    Parameters
    ----------
    A : array_like, shape (n, n)
        Symmetric positive semidefinite matrix.
    part : BlockPartition or sequence of int
        The U/V split; a plain sequence is taken as ``u_indices``.

    Returns
    -------
    GammaResult
        ``u_star = A11^+ A12 v_star`` and ``v_star`` attain ``gamma2``.
    """
    A, part, lmin, lmax = _prepare(A, part, psd_tol)
    A11, A12, A22 = part.blocks(A)
    W1, K1 = range_basis(A11, rank_tol, psd_tol)
    diag = {"lambda_min": lmin, "lambda_max": lmax}
    nu, nv = len(part.u_indices), len(part.v_indices)
    if W1.shape[1] == 0:
        diag["empty_subspace"] = True
        _, kdim_v = pseudo_inverse(A22, rank_tol)
        return GammaResult(0.0, np.zeros(nu), np.zeros(nv), K1.shape[1], kdim_v, "eigen", diag)
    C = W1.T @ A12
    try:
        lam, v_star, kdim_v = _pencil_max(C.T @ C, A22, rank_tol)
    except InconsistentPencilError as exc:
        raise InconsistentPencilError(f"A12 acts on ker(A22): {exc}") from None
    if not np.any(v_star):
        diag["empty_subspace"] = True
    gamma2 = max(lam, 0.0)
    u_star = W1 @ (C @ v_star)
    diag["near_one"] = gamma2 > 1.0 - NEAR_ONE
    if diag["near_one"]:
        logger.warning("gamma^2 = %.16g is within %g of 1", gamma2, NEAR_ONE)
    return GammaResult(gamma2, u_star, v_star, K1.shape[1], kdim_v, "eigen", diag)


def _block_solver(M, rank_tol):
    # Cholesky when definite, otherwise the pseudo-inverse (deflated solve).
    L = cholesky_spd(M, shift_tol=rank_tol)
    if L is not None:
        return (lambda b: scipy.linalg.cho_solve((L, True), b)), 0
    pinv, kdim = pseudo_inverse(M, rank_tol)
    return (lambda b: pinv @ b), kdim


def gamma_alternating(A, part, max_iter=20000, tol=1e-14, seed=0, v0=None,
                      rank_tol=RANK_TOL, psd_tol=PSD_TOL):
    """Alternating maximization of the energy ratio.

    With ``v`` fixed the best ``u`` solves ``A11 u = A12 v``; with ``u``
    fixed the best ``v`` solves ``A22 v = A21 u``. Each half step can only
    increase the ratio. Stops once a full step changes it by less than
    ``tol`` relative; after ``max_iter`` steps the best value is returned
    with ``diagnostics["converged"] = False``.
    """
    A, part, _, _ = _prepare(A, part, psd_tol)
    A11, A12, A22 = part.blocks(A)
    solve11, k1 = _block_solver(A11, rank_tol)
    solve22, k2 = _block_solver(A22, rank_tol)
    nu, nv = A12.shape
    if v0 is None:
        v0 = check_random_state(seed).standard_normal(nv)
    # start on range(A22): zero-energy components cannot contribute
    v = solve22(A22 @ np.asarray(v0, dtype=float))
    energy_tol = rank_tol * np.abs(A).max()
    best, best_pair, ratio = 0.0, (np.zeros(nu), v), 0.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        ev = float(v @ A22 @ v)
        if ev <= energy_tol * float(v @ v):
            break
        v = v / np.sqrt(ev)
        u = solve11(A12 @ v)
        eu = float(u @ A11 @ u)
        if eu <= energy_tol * max(float(u @ u), 1e-300):
            converged = True
            break
        half = float(u @ A12 @ v) ** 2 / eu
        v = solve22(A12.T @ u)
        new = energy_ratio(A11, A12, A22, u, v)
        if not np.isfinite(new):
            new = half
        if new > best:
            best, best_pair = new, (u.copy(), v.copy())
        if abs(new - ratio) <= tol * max(new, 1e-300):
            ratio = new
            converged = True
            break
        ratio = new
    if not converged:
        logger.warning("alternating maximization stopped after %d iterations", max_iter)
    diag = {"iterations": it, "converged": converged}
    return GammaResult(best, best_pair[0], best_pair[1], k1, k2, "alternating", diag)


def _unit_rows(x):
    n = np.linalg.norm(x, axis=1, keepdims=True)
    n[n == 0] = 1.0
    return x / n


def _batch_ratios(A11, A12, A22, U, V, den_tol):
    num = np.einsum("ij,jk,ik->i", U, A12, V)
    du = np.einsum("ij,jk,ik->i", U, A11, U)
    dv = np.einsum("ij,jk,ik->i", V, A22, V)
    ok = (du > den_tol) & (dv > den_tol)
    r = np.full(U.shape[0], -np.inf)
    r[ok] = num[ok] ** 2 / (du[ok] * dv[ok])
    return r


def gamma_sampling(A, part, trials=100000, seed=0, batch=2000, local_batch=200,
                   rank_tol=RANK_TOL, psd_tol=PSD_TOL):
    """Monte Carlo lower bound on ``gamma^2`` from ``trials`` random unit pairs.

    The first half of the pairs is drawn uniformly on the product of
    spheres in batches of ``batch``. The second half is drawn in batches of
    ``local_batch`` around the best pair found so far, with a Gaussian step
    that doubles (up to 1) after an improving batch and halves otherwise.
    Every evaluated pair is a feasible point, so the result
    never exceeds the true sup. Batch ``k`` uses the Philox stream
    ``seed`` advanced by ``k`` jumps, so the draw is fixed by ``seed`` alone.
    Pairs with an energy below ``rank_tol * max|A|`` are skipped.
    """
    A, part, _, _ = _prepare(A, part, psd_tol)
    A11, A12, A22 = part.blocks(A)
    nu, nv = A12.shape
    den_tol = rank_tol * np.abs(A).max()
    root = np.random.Philox(int(seed))
    best, bu, bv = 0.0, np.zeros(nu), np.zeros(nv)
    sigma = 0.3
    done = 0
    k = 0
    explore = trials // 2
    while done < trials:
        local = done >= explore and best > 0.0
        m = min(local_batch if local else batch, trials - done,
                explore - done if done < explore else trials)
        rng = np.random.Generator(root.jumped(k))
        k += 1
        if local:
            U = _unit_rows(bu + sigma * rng.standard_normal((m, nu)))
            V = _unit_rows(bv + sigma * rng.standard_normal((m, nv)))
        else:
            U = _unit_rows(rng.standard_normal((m, nu)))
            V = _unit_rows(rng.standard_normal((m, nv)))
        r = _batch_ratios(A11, A12, A22, U, V, den_tol)
        i = int(np.argmax(r))
        if r[i] > best:
            best, bu, bv = float(r[i]), U[i], V[i]
            if local:
                sigma = min(2.0 * sigma, 1.0)
        elif local:
            sigma = max(0.5 * sigma, 1e-9)
        done += m
    diag = {"trials": trials, "seed": seed, "final_step": sigma}
    return GammaResult(best, bu, bv, 0, 0, "sampling", diag)


def strengthened_check(A, part, g, trials=10000, seed=0, atol_rel=1e-10):
    """True iff ``|u^T A v| <= gamma sqrt(u^T A u) sqrt(v^T A v)`` on all sampled pairs.

    ``g`` is a :class:`GammaResult` or a bare ``gamma`` value. The sample is
    ``trials`` random pairs plus the result's extremal pair when present.
    """
    A = check_symmetric(A)
    if not isinstance(part, BlockPartition):
        part = BlockPartition.complement(part, A.shape[0])
    part.validate(A.shape[0])
    gamma = g.gamma if isinstance(g, GammaResult) else float(g)
    A11, A12, A22 = part.blocks(A)
    rng = check_random_state(seed)
    U = rng.standard_normal((trials, A12.shape[0]))
    V = rng.standard_normal((trials, A12.shape[1]))
    if isinstance(g, GammaResult) and g.u_star is not None and np.any(g.u_star) and np.any(g.v_star):
        U = np.vstack([U, g.u_star])
        V = np.vstack([V, g.v_star])
    lhs = np.abs(np.einsum("ij,jk,ik->i", U, A12, V))
    du = np.maximum(np.einsum("ij,jk,ik->i", U, A11, U), 0.0)
    dv = np.maximum(np.einsum("ij,jk,ik->i", V, A22, V), 0.0)
    scale = np.linalg.norm(U, axis=1) * np.linalg.norm(V, axis=1)
    rhs = gamma * np.sqrt(du) * np.sqrt(dv) + atol_rel * np.abs(A).max() * scale
    return bool(np.all(lhs <= rhs))


def compute_gamma(A, part, method="eigen", **kwargs):
    if method == "eigen":
        return gamma_exact(A, part, **kwargs)
    if method == "alternating":
        return gamma_alternating(A, part, **kwargs)
    if method == "sampling":
        return gamma_sampling(A, part, **kwargs)
    raise CBSError(f"unknown method {method!r}; expected one of {METHODS}")


class StrengthenedCBS(BaseEstimator):
    """Estimator wrapper around the three gamma computations.

    ``fit(A)`` takes the SPSD matrix; the U block is given by ``u_indices``
    and V is its complement.

    >>> est = StrengthenedCBS(u_indices=[0]).fit([[1.0, 0.5], [0.5, 1.0]])
    >>> round(est.gamma2_, 12)
    0.25
    """

    def __init__(self, u_indices=None, method="eigen", rank_tol=RANK_TOL, trials=100000,
                 seed=0, max_iter=20000, tol=1e-14):
        self.u_indices = u_indices
        self.method = method
        self.rank_tol = rank_tol
        self.trials = trials
        self.seed = seed
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y=None):
        A = check_symmetric(X)
        if self.u_indices is None:
            raise CBSError("u_indices must be set before fit")
        part = BlockPartition.complement(self.u_indices, A.shape[0]).validate(A.shape[0])
        if self.method == "eigen":
            res = gamma_exact(A, part, rank_tol=self.rank_tol)
        elif self.method == "alternating":
            res = gamma_alternating(A, part, max_iter=self.max_iter, tol=self.tol,
                                    seed=self.seed, rank_tol=self.rank_tol)
        elif self.method == "sampling":
            res = gamma_sampling(A, part, trials=self.trials, seed=self.seed,
                                 rank_tol=self.rank_tol)
        else:
            raise CBSError(f"unknown method {self.method!r}; expected one of {METHODS}")
        self.n_features_in_ = A.shape[0]
        self.partition_ = part
        self.result_ = res
        self.gamma2_ = res.gamma2
        self.gamma_ = res.gamma
        self.u_star_ = res.u_star
        self.v_star_ = res.v_star
        return self

    def score(self, X, y=None):
        """Whether the fitted constant satisfies the inequality on ``X``'s blocks."""
        return float(strengthened_check(X, self.partition_, self.result_, seed=self.seed))
