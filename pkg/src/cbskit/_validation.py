"""Input validation helpers, in the spirit of ``sklearn.utils.validation``."""

import numpy as np

from .exceptions import CBSError, DimensionMismatchError


def _frozen(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def check_vector(x, name="x", allow_empty=False):
    """Return ``x`` as a read-only 1-D float array with finite entries."""
    try:
        arr = np.asarray(x, dtype=float)
    except (TypeError, ValueError) as exc:
        raise CBSError(f"{name} is not a real sequence: {exc}") from None
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise CBSError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0 and not allow_empty:
        raise CBSError(f"{name} must have length >= 1")
    # NaN or inf makes x.x non-finite; only then is the elementwise scan needed
    if not np.isfinite(np.dot(arr, arr)) and not np.isfinite(arr).all():
        raise CBSError(f"{name} contains NaN or infinite entries")
    # a read-only view: callers cannot write through it, the input stays writable
    view = arr.view()
    view.setflags(write=False)
    return view


def check_weights(p, name="p"):
    """Return a read-only weight vector; every weight must be finite and > 0."""
    arr = check_vector(p, name=name)
    if np.any(arr <= 0):
        bad = int(np.flatnonzero(arr <= 0)[0])
        raise CBSError(f"{name}[{bad}] = {arr[bad]!r} is not strictly positive")
    return arr


def check_same_length(*arrays, names=None):
    sizes = [len(a) for a in arrays]
    if len(set(sizes)) > 1:
        label = ", ".join(f"{n}={s}" for n, s in zip(names or range(len(sizes)), sizes))
        raise DimensionMismatchError(f"length mismatch: {label}")


def check_symmetric(A, name="A", asym_tol=1e-8):
    """Symmetrize ``A`` on ingest.

    The relative asymmetry ``max|A - A^T| / ||A||_inf`` must not exceed
    ``asym_tol``; the returned read-only matrix is exactly symmetric.
    """
    try:
        arr = np.asarray(A, dtype=float)
    except (TypeError, ValueError) as exc:
        raise CBSError(f"{name} is not a real matrix: {exc}") from None
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise CBSError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise CBSError(f"{name} contains NaN or infinite entries")
    norm_inf = np.abs(arr).sum(axis=1).max()
    asym = np.abs(arr - arr.T).max()
    if asym > asym_tol * norm_inf:
        raise CBSError(
            f"{name} is not symmetric: max asymmetry {asym:.3e} exceeds "
            f"{asym_tol:g} * ||{name}||_inf = {asym_tol * norm_inf:.3e}"
        )
    return _frozen(0.5 * (arr + arr.T))


def check_random_state(seed):
    """Turn ``seed`` into a counter-based ``numpy.random.Generator`` (Philox)."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        return np.random.Generator(np.random.Philox())
    return np.random.Generator(np.random.Philox(int(seed)))
