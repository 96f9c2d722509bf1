import numpy as np
import pytest

from jdlab.cost import cost_Y, cost_via_gamma, gamma, off
from jdlab.ensemble import Transvection, build_M0, random_setup, transvection_matrix
from jdlab.exceptions import DimensionError, NotUnitaryError
from jdlab.linalg import fro_dist, random_unitary

A = np.array([[1.0, 2.0], [3.0, 4.0]])


def off_oracle(X):
    n = X.shape[0]
    return sum(abs(X[i, j]) ** 2 for i in range(n) for j in range(n) if i != j)


def test_off_examples():
    assert off(np.eye(3)) == 0
    assert off(A) == 13
    for a in [0, 5, 3 - 2j, 1e-3j]:
        K = transvection_matrix(4, Transvection(2, 4, a))
        a = complex(a)
        assert off(K) == a.real * a.real + a.imag * a.imag
    with pytest.raises(DimensionError):
        off(np.ones((2, 3)))


def test_off_matches_summation_and_diag_distance():
    rng = np.random.default_rng(0)
    for _ in range(20):
        X = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        assert off(X) == pytest.approx(off_oracle(X), rel=1e-13)
        assert off(X) == pytest.approx(fro_dist(X, np.diag(np.diag(X))) ** 2, rel=1e-13)


def test_cost_examples():
    st = random_setup(4, 3, 5)
    M0 = build_M0(st.U, st.diag)
    scale = np.linalg.norm(M0)
    assert cost_Y(st.U, M0) <= 1e-20 * scale**2
    assert cost_via_gamma(st.U, M0) <= 1e-20 * scale**2
    D = np.stack([np.diag([1.0, 2, 3]), np.diag([4.0, 5, 6])])
    assert cost_Y(np.eye(3), D) == 0
    assert cost_via_gamma(np.eye(3), D) == 0
    assert cost_Y(np.eye(2), A[None]) == 13


def test_cost_errors():
    with pytest.raises(NotUnitaryError):
        cost_Y(2 * np.eye(2), A[None])
    with pytest.raises(DimensionError):
        cost_Y(np.eye(3), A[None])
    # unitarity check can be switched off
    assert cost_Y(2 * np.eye(2), A[None], tol=None) == 13 * 16


def test_gamma_examples():
    assert gamma(np.eye(2), A[None], 1, 2, 1) == 3
    D = np.diag([1.0, 2, 3])[None]
    assert gamma(np.eye(3), D, 1, 3, 1) == 0
    rng = np.random.default_rng(3)
    M = rng.standard_normal((2, 3, 3)) + 1j * rng.standard_normal((2, 3, 3))
    V = random_unitary(3, 1)
    assert gamma(V, 2 * M, 2, 3, 2) == pytest.approx(2 * gamma(V, M, 2, 3, 2), rel=1e-14)
    # conjugate-linear in M_k
    assert gamma(V, 1j * M, 2, 3, 2) == pytest.approx(-1j * gamma(V, M, 2, 3, 2), rel=1e-14)
    with pytest.raises(IndexError):
        gamma(V, M, 1, 2, 3)


def test_cost_identity_random():
    rng = np.random.default_rng(4)
    for s in range(100):
        n, m = rng.integers(2, 7), rng.integers(1, 9)
        V = random_unitary(n, s)
        M = rng.standard_normal((m, n, n)) + 1j * rng.standard_normal((m, n, n))
        assert cost_via_gamma(V, M) == pytest.approx(cost_Y(V, M), rel=1e-12)


def test_cost_is_J_invariant():
    rng = np.random.default_rng(5)
    for s in range(30):
        n = 4
        V = random_unitary(n, s)
        M = rng.standard_normal((3, n, n)) + 1j * rng.standard_normal((3, n, n))
        J = np.eye(n)[rng.permutation(n)] * np.exp(1j * rng.uniform(0, 2 * np.pi, n))
        assert cost_Y(V @ J, M) == pytest.approx(cost_Y(V, M), rel=1e-12)
        for X in M:
            assert off(J.conj().T @ X @ J) == pytest.approx(off(X), rel=1e-12)
