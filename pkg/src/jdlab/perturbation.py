"""First-order correction of a joint diagonalizer under ``M0 + lam R``.

For ``M_k = U D_k U^H + lam R_k`` the minimizer moves, to first order, to
``U (I + lam G)`` with ``G`` anti-hermitian, zero on the diagonal and

    g_ij = 1/2 sum_k [ conj(f_ij(k)) u_i^H R_k u_j + f_ij(k) u_i^H R_k^H u_j ],
    f_ij(k) = (d_j(k) - d_i(k)) / sum_l |d_j(l) - d_i(l)|^2,

``u_i`` being the i-th column of ``U``.  Minimizers are only defined up to
``J`` = permutation times unit-modulus diagonal, hence ``align``.
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import AlignmentError, DegenerateSpectraError, NotUnitaryError
from .linalg import as_square, check_index, fro_dist


def _denominators(d):
    """``sum_l |d_j(l) - d_i(l)|^2`` for every pair, shape ``(n, n)``."""
    diff = d[:, None, :] - d[:, :, None]  # diff[l, i, j] = d_j(l) - d_i(l)
    return diff, np.sum(np.abs(diff) ** 2, axis=0)


def f_coeff(diag, i, j, k):
    n, m = diag.n, diag.m
    i0, j0 = check_index(i, n, "i"), check_index(j, n, "j")
    k0 = check_index(k, m, "k")
    if i0 == j0:
        raise ValueError("f_coeff needs i != j")
    d = diag.d
    den = np.sum(np.abs(d[:, j0] - d[:, i0]) ** 2)
    if den == 0.0:
        raise DegenerateSpectraError(f"indices {i} and {j} are not separated by any D_k")
    return complex((d[k0, j0] - d[k0, i0]) / den)


def build_G(setup):
    """Anti-hermitian first-order generator for ``setup`` (ignores ``lam`` and ``a``)."""
    d = setup.diag.d
    n = setup.n
    diff, den = _denominators(d)
    off_mask = ~np.eye(n, dtype=bool)
    if np.any(den[off_mask] == 0.0):
        raise DegenerateSpectraError("separation condition violated")
    den = np.where(off_mask, den, 1.0)
    f = diff / den  # f[k, i, j]
    Rt = setup.centered_R()  # Rt[k, i, j] = u_i^H R_k u_j
    RtH = np.conj(np.swapaxes(Rt, 1, 2))  # u_i^H R_k^H u_j
    G = 0.5 * np.sum(np.conj(f) * Rt + f * RtH, axis=0)
    G[~off_mask] = 0.0
    return G


def predicted_diagonalizer(setup, G):
    return setup.U @ (np.eye(setup.n) + setup.lam * G)


@dataclass(frozen=True, eq=False)
class AlignmentJ:
    """``J[perm[c] - 1, c] = phases[c]``; ``perm`` is 1-based."""

    perm: tuple
    phases: np.ndarray

    def __post_init__(self):
        n = len(self.perm)
        if sorted(self.perm) != list(range(1, n + 1)):
            raise ValueError(f"not a permutation of 1..{n}: {self.perm}")
        phases = np.asarray(self.phases, dtype=np.complex128)
        if phases.shape != (n,) or np.any(np.abs(np.abs(phases) - 1.0) > 1e-12):
            raise ValueError("phases must be n unit-modulus numbers")
        object.__setattr__(self, "phases", phases)

    @property
    def n(self):
        return len(self.perm)

    def matrix(self):
        J = np.zeros((self.n, self.n), dtype=np.complex128)
        J[np.asarray(self.perm) - 1, np.arange(self.n)] = self.phases
        return J

    @classmethod
    def identity(cls, n):
        return cls(tuple(range(1, n + 1)), np.ones(n))


def align(V, U, tol=1e-8):
    """Find ``J`` making ``V J`` closest to ``U`` by greedy assignment.

    Columns of ``V`` are matched to columns of ``U`` by repeatedly taking
    the largest remaining ``|P[r, c]|`` of ``P = V^H U`` (smallest row, then
    column, on ties); each match is phased so ``P[r, c]`` becomes positive
    real.  Returns ``(J, V @ J, fro_dist(V @ J, U))``.
    """
    V, U = as_square(V, "V"), as_square(U, "U")
    n = U.shape[0]
    eye = np.eye(n)
    for name, X in (("V", V), ("U", U)):
        if np.max(np.abs(X.conj().T @ X - eye)) > tol:
            raise NotUnitaryError(f"{name} is not unitary at tolerance {tol:.1e}")
    P = V.conj().T @ U
    mod = np.abs(P)
    free_rows = np.ones(n, dtype=bool)
    free_cols = np.ones(n, dtype=bool)
    perm = [0] * n
    phases = np.ones(n, dtype=np.complex128)
    tied = False
    for _ in range(n):
        masked = np.where(free_rows[:, None] & free_cols[None, :], mod, -1.0)
        best = masked.max()
        # row-major argmax gives smallest row, then smallest column
        r, c = np.unravel_index(int(np.argmax(masked)), masked.shape)
        if np.count_nonzero(masked >= best - 1e-12) > 1:
            tied = True
        if best <= 1e-12:
            why = " after a tie" if tied else ""
            raise AlignmentError(f"column {c + 1} has no non-zero candidate left{why}")
        perm[c] = r + 1
        phases[c] = P[r, c] / mod[r, c]
        free_rows[r] = free_cols[c] = False
    J = AlignmentJ(tuple(perm), phases)
    VJ = V @ J.matrix()
    return J, VJ, fro_dist(VJ, U)
