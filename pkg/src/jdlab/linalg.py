"""Dense complex matrix helpers shared by every other module.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Index
arguments exposed to callers (``unit_basis`` and friends elsewhere in the
package) are 1-based, matching the usual mathematical notation
``e_ij``; arrays themselves are indexed the numpy way.

Random generation uses ``numpy.random.default_rng`` (PCG64 bit generator,
standard normal variates by the ziggurat method).  Both are stable across
numpy releases and platforms, so a seed pins the generated matrices.
"""
import numpy as np

from .exceptions import DimensionError

DEFAULT_TOL = 1e-10


def as_mat(A, name="matrix"):
    """Return ``A`` as a finite 2-D complex128 array."""
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise DimensionError(f"{name} must be non-empty, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def as_square(A, name="matrix"):
    A = as_mat(A, name)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {A.shape}")
    return A


def adjoint(A):
    """Conjugate transpose."""
    return as_mat(A).conj().T


def check_index(i, n, name="index"):
    if not isinstance(i, (int, np.integer)) or isinstance(i, bool):
        raise TypeError(f"{name} must be an integer, got {i!r}")
    if not 1 <= i <= n:
        raise IndexError(f"{name}={i} out of range 1..{n}")
    return int(i) - 1


def unit_basis(n, i, j):
    """Matrix unit ``E_ij``: 1 at row ``i``, column ``j`` (1-based)."""
    if n < 1:
        raise DimensionError(f"n must be positive, got {n}")
    E = np.zeros((n, n), dtype=np.complex128)
    E[check_index(i, n, "i"), check_index(j, n, "j")] = 1.0
    return E


def is_unitary(A, tol=DEFAULT_TOL):
    A = as_square(A)
    err = A @ A.conj().T - np.eye(A.shape[0])
    return bool(np.max(np.abs(err)) <= tol)


def is_antihermitian(A, tol=DEFAULT_TOL):
    A = as_square(A)
    return bool(np.max(np.abs(A.conj().T + A)) <= tol)


def fro_dist(A, B):
    """Frobenius distance ``||A - B||_F``."""
    A, B = as_mat(A), as_mat(B)
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    return float(np.linalg.norm(A - B))


def _gaussian(rng, shape, real_only):
    if real_only:
        return rng.standard_normal(shape).astype(np.complex128)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def orthonormalize_columns(X):
    """Modified Gram-Schmidt with one re-orthogonalization pass per column.

    Applied to a Gaussian matrix this yields a Haar-distributed unitary
    (the Q factor with positive R diagonal).
    """
    X = np.array(X, dtype=np.complex128)
    n_cols = X.shape[1]
    Q = np.zeros_like(X)
    for c in range(n_cols):
        v = X[:, c].copy()
        for _ in range(2):
            for p in range(c):
                v -= np.vdot(Q[:, p], v) * Q[:, p]
        nrm = np.linalg.norm(v)
        if nrm == 0.0:
            raise np.linalg.LinAlgError("columns are linearly dependent")
        Q[:, c] = v / nrm
    return Q


def unitary_from_rng(rng, n, real_only=False):
    return orthonormalize_columns(_gaussian(rng, (n, n), real_only))


def random_unitary(n, seed, real_only=False):
    """Seeded Haar-random unitary (orthogonal when ``real_only``)."""
    if n < 1:
        raise DimensionError(f"n must be positive, got {n}")
    return unitary_from_rng(np.random.default_rng(seed), n, real_only)


def random_antihermitian(n, seed, real_only=False, scale=1.0):
    """Seeded anti-hermitian matrix with unit Frobenius norm times ``scale``."""
    rng = np.random.default_rng(seed)
    X = _gaussian(rng, (n, n), real_only)
    L = X - X.conj().T
    return scale * L / np.linalg.norm(L)


def random_sl(n, seed, real_only=False):
    """Seeded Gaussian matrix rescaled to determinant 1."""
    rng = np.random.default_rng(seed)
    B = _gaussian(rng, (n, n), real_only)
    det = np.linalg.det(B)
    if real_only:
        det = det.real
        if det < 0:
            B[0] = -B[0]
            det = -det
        return B / det ** (1.0 / n)
    root = np.abs(det) ** (1.0 / n) * np.exp(1j * np.angle(det) / n)
    return B / root


def nearest_unitary(A):
    """Unitary polar factor of ``A`` (closest unitary in Frobenius norm)."""
    W, _, Zh = np.linalg.svd(as_square(A))
    return W @ Zh
