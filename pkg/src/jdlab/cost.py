"""Off-diagonal norm, the joint diagonalization cost and the gamma maps."""
import numpy as np

from .exceptions import DimensionError, NotUnitaryError
from .linalg import as_square, check_index

UNITARY_TOL = 1e-8


def as_ensemble(M, n=None):
    """Return an ensemble as a complex array of shape ``(m, n, n)``."""
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim == 2:
        M = M[None]
    if M.ndim != 3 or M.shape[0] < 1 or M.shape[1] != M.shape[2] or M.shape[1] < 1:
        raise DimensionError(f"ensemble must have shape (m, n, n), got {M.shape}")
    if n is not None and M.shape[1] != n:
        raise DimensionError(f"ensemble members are {M.shape[1]}x{M.shape[1]}, expected {n}x{n}")
    if not np.all(np.isfinite(M)):
        raise ValueError("ensemble has non-finite entries")
    return M


def off(A):
    """Sum of squared moduli of the off-diagonal entries of ``A``."""
    A = as_square(A)
    x = A[~np.eye(A.shape[0], dtype=bool)]
    return float(np.sum(x.real**2 + x.imag**2))


def _check_pair(V, M, tol):
    V = as_square(V, "V")
    M = as_ensemble(M, V.shape[0])
    if tol is not None:
        err = np.max(np.abs(V.conj().T @ V - np.eye(V.shape[0])))
        if err > tol:
            raise NotUnitaryError(f"V deviates from unitarity by {err:.3e} > {tol:.1e}")
    return V, M


def rotate(V, M):
    """Stack of ``V^H M_k V``."""
    return V.conj().T @ M @ V


def cost_Y(V, M, tol=UNITARY_TOL):
    """Joint off-norm ``sum_k off(V^H M_k V)``.

    ``tol`` bounds the accepted deviation of ``V`` from unitarity; pass
    ``None`` to evaluate at arbitrary ``V`` (e.g. raw first-order points).
    """
    V, M = _check_pair(V, M, tol)
    return float(sum(off(B) for B in rotate(V, M)))


def gamma(V, M, i, j, k):
    """Entry ``(i, j)`` of ``V^H M_k^H V`` (1-based indices)."""
    V = as_square(V, "V")
    M = as_ensemble(M, V.shape[0])
    n, m = V.shape[0], M.shape[0]
    i0, j0 = check_index(i, n, "i"), check_index(j, n, "j")
    k0 = check_index(k, m, "k")
    return complex(_gamma_matrix(V, M[k0])[i0, j0])


def _gamma_matrix(V, Mk):
    return V.conj().T @ Mk.conj().T @ V


def cost_via_gamma(V, M, tol=UNITARY_TOL):
    """The same cost assembled entry by entry from ``gamma``."""
    V, M = _check_pair(V, M, tol)
    n = V.shape[0]
    total = 0.0
    for Mk in M:
        C = _gamma_matrix(V, Mk)
        for i in range(n):
            for j in range(n):
                if i != j:
                    total += abs(C[i, j]) ** 2
    return total
