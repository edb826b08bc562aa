"""Dense symmetric linear algebra: Jacobi eigensolver, Cholesky,
pseudo-inverse and the largest eigenvalue of a semidefinite pencil.

Everything here targets small element-level matrices (n up to ~100).
"""

from dataclasses import dataclass

import numba
import numpy as np

from ._validation import check_symmetric
from .exceptions import (
    ConvergenceError,
    InconsistentPencilError,
    NotPositiveSemidefiniteError,
)

#: eigenvalues at or below RANK_TOL * lambda_max are treated as kernel
RANK_TOL = 1e-10
#: eigenvalues below -PSD_TOL * lambda_max make a matrix indefinite
PSD_TOL = 1e-10
JACOBI_TOL = 1e-14
MAX_SWEEPS = 50


@numba.njit(cache=True, nogil=True)
def _jacobi_sweeps(a, v, tol, max_sweeps):
    # In-place cyclic Jacobi: a is driven to diagonal form, v accumulates the
    # rotations. Returns (sweeps used, final off-diagonal Frobenius norm);
    # sweeps is -1 when max_sweeps was exhausted.
    n = a.shape[0]
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale += a[i, j] * a[i, j]
    scale = np.sqrt(scale)
    off = 0.0
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += a[i, j] * a[i, j]
        off = np.sqrt(off)
        if off <= tol * scale:
            return sweep, off
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    return -1, off


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues and orthonormal eigenvectors (as columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    def reconstruct(self):
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.T

    @property
    def lambda_max(self):
        return float(np.max(np.abs(self.eigenvalues)))


def eigen_sym(A, tol=JACOBI_TOL, max_sweeps=MAX_SWEEPS):
    """Full spectral decomposition of a symmetric matrix by cyclic Jacobi.

    Sweeps stop once the off-diagonal Frobenius norm is at most
    ``tol * ||A||_F``. Raises :class:`ConvergenceError` (carrying the residual
    off-diagonal norm) when ``max_sweeps`` is exhausted.
    """
    A = check_symmetric(A)
    a = np.array(A, dtype=np.float64, order="C")
    v = np.eye(a.shape[0])
    sweeps, off = _jacobi_sweeps(a, v, float(tol), int(max_sweeps))
    if sweeps < 0:
        raise ConvergenceError(
            f"Jacobi did not converge in {max_sweeps} sweeps "
            f"(off-diagonal norm {off:.3e}, ||A||_F {np.linalg.norm(A):.3e})",
            residual=off,
        )
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], v[:, order], sweeps)


def cholesky_spd(A, shift_tol=1e-12):
    """Lower-triangular ``L`` with ``L L^T = A``.

    Returns ``None`` when a pivot is at most ``shift_tol`` times the largest
    diagonal entry but not negative beyond it (semidefinite, rank
    deficient). Raises :class:`NotPositiveSemidefiniteError` for a pivot
    below ``-shift_tol * max(diag A)``.
    """
    A = check_symmetric(A)
    n = A.shape[0]
    dmax = max(float(np.max(np.diag(A))), 0.0)
    thresh = shift_tol * dmax
    L = np.zeros_like(A)
    for j in range(n):
        pivot = A[j, j] - np.dot(L[j, :j], L[j, :j])
        if pivot < -thresh or (dmax == 0.0 and pivot < 0):
            raise NotPositiveSemidefiniteError(
                f"negative pivot {pivot:.3e} at column {j}: matrix is indefinite"
            )
        if pivot <= thresh:
            return None
        L[j, j] = np.sqrt(pivot)
        L[j + 1 :, j] = (A[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def pseudo_inverse(A, rank_tol=RANK_TOL):
    """Moore-Penrose inverse of a symmetric matrix and its kernel dimension.

    Eigenvalues at or below ``rank_tol * lambda_max`` are treated as zero.
    """
    dec = eigen_sym(A)
    w, q = dec.eigenvalues, dec.eigenvectors
    keep = w > rank_tol * dec.lambda_max
    qr = q[:, keep]
    pinv = (qr / w[keep]) @ qr.T
    pinv = 0.5 * (pinv + pinv.T)
    return pinv, int(w.size - np.count_nonzero(keep))


def range_basis(M, rank_tol=RANK_TOL, psd_tol=PSD_TOL):
    """Split an SPSD matrix into ``(W, K)``.

    ``W = Q_r diag(lambda_r)^{-1/2}`` spans the range and whitens it
    (``W^T M W = I``); ``K`` is an orthonormal kernel basis.
    """
    dec = eigen_sym(M)
    w, q = dec.eigenvalues, dec.eigenvectors
    lmax = dec.lambda_max
    if w.size and w[0] < -psd_tol * lmax:
        raise NotPositiveSemidefiniteError(
            f"smallest eigenvalue {w[0]:.3e} < -{psd_tol:g} * lambda_max ({lmax:.3e})"
        )
    keep = w > rank_tol * lmax
    return q[:, keep] / np.sqrt(w[keep]), q[:, ~keep]


def gen_eigen_max(B, M, rank_tol=RANK_TOL, consistency_tol=1e-7):
    """Largest ``lambda`` with ``B x = lambda M x`` on the range of ``M``.

    ``M`` must be SPSD. The kernel of ``M`` is deflated and the whitened
    standard problem ``W^T B W`` is solved. If ``B`` acts on ``ker M`` beyond
    ``consistency_tol * ||B||_F`` the pencil is inconsistent and
    :class:`InconsistentPencilError` is raised. An empty range gives
    ``(0.0, zero vector)``.

    Returns ``(lambda_max, x)`` with ``x^T M x = 1`` whenever the range is
    nonempty.
    """
    lam, x, _ = _pencil_max(B, M, rank_tol, consistency_tol)
    return lam, x


def _pencil_max(B, M, rank_tol=RANK_TOL, consistency_tol=1e-7):
    # gen_eigen_max plus the dimension of the deflated kernel of M
    B = check_symmetric(B, "B")
    M = check_symmetric(M, "M")
    if B.shape != M.shape:
        raise InconsistentPencilError(f"pencil shapes differ: {B.shape} vs {M.shape}")
    W, K = range_basis(M, rank_tol)
    bnorm = np.linalg.norm(B)
    if K.shape[1] and np.linalg.norm(B @ K) > consistency_tol * max(bnorm, np.finfo(float).tiny):
        raise InconsistentPencilError(
            f"B has components on ker(M) of size {np.linalg.norm(B @ K):.3e} "
            f"(||B||_F = {bnorm:.3e})"
        )
    if W.shape[1] == 0:
        return 0.0, np.zeros(B.shape[0]), K.shape[1]
    dec = eigen_sym(W.T @ B @ W)
    return float(dec.eigenvalues[-1]), W @ dec.eigenvectors[:, -1], K.shape[1]
