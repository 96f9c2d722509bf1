"""Commutator operators whose hermitian defect detects stationary points.

With ``C_k = V^H M_k^H V`` and ``gamma_ijk = C_k[i, j]``:

    T_ijk = E_ij C_k - C_k E_ij
    S     = sum_k sum_{i != j} conj(gamma_ijk) T_ijk

For real symmetric ensembles ``S`` is antisymmetric and vanishes exactly at
stationary points of the joint off-norm, so ``||S - S^H||`` measures the
distance from stationarity.

``S_first_order`` is the expansion of ``S(I + lam L, N)`` to linear order
in ``lam`` for ``N_k = K_k + lam Rt_k`` (transvection plus centred
perturbation).
"""
import numpy as np

from .cost import as_ensemble
from .ensemble import build_N_a_lambda
from .linalg import as_square, check_index, unit_basis


def _C(V, Mk):
    return V.conj().T @ Mk.conj().T @ V


def T_map(V, M, i, j, k):
    V = as_square(V, "V")
    M = as_ensemble(M, V.shape[0])
    n = V.shape[0]
    k0 = check_index(k, M.shape[0], "k")
    E = unit_basis(n, i, j)
    C = _C(V, M[k0])
    return E @ C - C @ E


def _S_from_C(C):
    # sum_{i != j} conj(C_ij) (E_ij C - C E_ij) = F C - C F with F_ij = conj(C_ij) off the diagonal
    F = np.conj(C)
    idx = np.arange(C.shape[-1])
    F[..., idx, idx] = 0.0
    return np.sum(F @ C - C @ F, axis=0)


def S_map(V, M):
    """The operator ``S(V, M)``; ``V`` need not be exactly unitary."""
    V = as_square(V, "V")
    M = as_ensemble(M, V.shape[0])
    return _S_from_C(V.conj().T @ np.conj(np.swapaxes(M, 1, 2)) @ V)


def stationarity_residual(V, M):
    S = S_map(V, M)
    return float(np.linalg.norm(S - S.conj().T) / max(1.0, np.linalg.norm(S)))


def first_order_terms(L, K, i, j, Rt=None):
    """Coefficients of ``conj(gamma) = delta + lam eps`` and ``T = alpha + lam beta``.

    Evaluated at ``V = I + lam L`` for the single member ``K + lam Rt``
    (``Rt`` defaults to zero).  Indices are 1-based.  ``delta`` and
    ``epsilon`` are read at ``(j, i)`` because ``conj((W^H N^H W)_ij)``
    equals ``(W^H N W)_ji``.
    """
    L, K = as_square(L, "L"), as_square(K, "K")
    n = K.shape[0]
    i0, j0 = check_index(i, n, "i"), check_index(j, n, "j")
    E = unit_basis(n, i, j)
    KH, LH = K.conj().T, L.conj().T
    alpha = E @ KH - KH @ E
    beta = (E @ KH @ L - LH @ KH @ E) + (E @ LH @ KH - KH @ L @ E)
    first = K @ L + LH @ K
    if Rt is not None:
        Rt = as_square(Rt, "Rt")
        RtH = Rt.conj().T
        beta = beta + (E @ RtH - RtH @ E)
        first = first + Rt
    delta = complex(K[j0, i0])
    epsilon = complex(first[j0, i0])
    return alpha, beta, delta, epsilon


def S_first_order(L, K, Rt, lam):
    """Linear-in-``lam`` truncation of ``S(I + lam L, K + lam Rt)``.

    ``K`` and ``Rt`` are ``(m, n, n)`` stacks, typically
    ``setup.transvections()`` and ``setup.centered_R()``; pass ``Rt=None``
    to expand around the unperturbed transvections alone.  The
    ``lam**2`` product ``epsilon * beta`` is dropped.
    """
    K = as_ensemble(K)
    n = K.shape[1]
    L = as_square(L, "L")
    S = np.zeros((n, n), dtype=np.complex128)
    for k in range(K.shape[0]):
        Rk = None if Rt is None else Rt[k]
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if i == j:
                    continue
                alpha, beta, delta, eps = first_order_terms(L, K[k], i, j, Rk)
                S += delta * alpha + (delta * beta + eps * alpha) * lam
    return S


def remainder_ratio(L, setup, lam):
    """``||S - S1||(lam) / ||S - S1||(lam / 2)``; about 4 for a quadratic remainder."""
    def rem(t):
        N = build_N_a_lambda(setup.with_(lam=t))
        S = S_map(np.eye(setup.n) + t * L, N)
        S1 = S_first_order(L, setup.transvections(), setup.centered_R(), t)
        return np.linalg.norm(S - S1)

    return float(rem(lam) / rem(lam / 2))
