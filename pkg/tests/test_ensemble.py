import itertools

import numpy as np
import pytest

from jdlab.cost import cost_Y, off
from jdlab.ensemble import (
    DiagonalSet,
    PerturbationSetup,
    Transvection,
    build_M0,
    build_M_a_lambda,
    build_M_lambda,
    build_N_a_lambda,
    decompose_transvections,
    product_ensemble,
    random_setup,
    separation_condition,
    transvection_matrix,
    transvection_product,
)
from jdlab.exceptions import DeterminantError, DimensionError, EliminationError
from jdlab.linalg import is_unitary, random_sl


def charpoly(A):
    """Faddeev-LeVerrier coefficients from traces of powers only."""
    n = A.shape[0]
    coeffs = [1.0 + 0j]
    Mk = np.zeros_like(A)
    I = np.eye(n)
    for k in range(1, n + 1):
        Mk = A @ Mk + coeffs[-1] * I
        coeffs.append(-np.trace(A @ Mk) / k)
    return np.array(coeffs)


def test_transvection_matrix():
    np.testing.assert_array_equal(transvection_matrix(2, Transvection(1, 2, 5)), [[1, 5], [0, 1]])
    np.testing.assert_array_equal(transvection_matrix(3, Transvection(1, 3, 0)), np.eye(3))
    np.testing.assert_array_equal(transvection_matrix(2, Transvection(1, 2, 3), [2, 7]), [[2, 3], [0, 7]])
    assert np.linalg.det(transvection_matrix(4, Transvection(4, 1, 2 - 1j))) == pytest.approx(1)
    with pytest.raises(ValueError):
        Transvection(2, 2, 1)
    with pytest.raises(IndexError):
        transvection_matrix(2, Transvection(1, 3, 1))
    with pytest.raises(DimensionError):
        transvection_matrix(3, Transvection(1, 2, 1), [1, 2])


def test_build_M0():
    st = random_setup(4, 3, 1)
    np.testing.assert_array_equal(build_M0(np.eye(4), st.diag), st.diag.matrices())
    M0 = build_M0(st.U, st.diag)
    assert cost_Y(st.U, M0) <= 1e-20 * np.linalg.norm(M0) ** 2
    for Mk, dk in zip(M0, st.diag.d):
        np.testing.assert_allclose(charpoly(Mk), charpoly(np.diag(dk)), atol=1e-12)
    with pytest.raises(DimensionError):
        build_M0(np.eye(3), st.diag)


def test_build_M_lambda():
    st = random_setup(4, 3, 2, lam=1e-3)
    M0 = build_M0(st.U, st.diag)
    np.testing.assert_array_equal(build_M_lambda(st.with_(lam=0.0)), M0)
    np.testing.assert_array_equal(build_M_lambda(st.with_(R=np.zeros_like(st.R))), M0)
    Ml = build_M_lambda(st)
    for k in range(st.m):
        assert np.linalg.norm(Ml[k] - M0[k]) == pytest.approx(1e-3 * np.linalg.norm(st.R[k]), rel=1e-9)


def test_build_M_a_lambda_and_N():
    st = random_setup(4, 3, 3, lam=1e-3, a=0.7, tpos=(3, 1))
    np.testing.assert_array_equal(build_M_a_lambda(st.with_(a=0.0)), build_M_lambda(st))
    np.testing.assert_array_equal(build_M_a_lambda(st.with_(a=0.0, lam=0.0)), build_M0(st.U, st.diag))
    small = PerturbationSetup(np.eye(2), DiagonalSet([[1, 1]]), np.zeros((1, 2, 2)), lam=0, a=3, tpos=(1, 2))
    np.testing.assert_array_equal(build_M_a_lambda(small), [[[1, 3], [0, 1]]])

    np.testing.assert_array_equal(build_N_a_lambda(st.with_(lam=0.0)), st.transvections())
    eye_st = st.with_(U=np.eye(4))
    np.testing.assert_allclose(build_N_a_lambda(eye_st), eye_st.transvections() + 1e-3 * st.R, atol=1e-15)
    # centring identity U^H M_{a,lam} U = N_{a,lam}
    M = build_M_a_lambda(st)
    N = build_N_a_lambda(st)
    np.testing.assert_allclose(st.U.conj().T @ M @ st.U, N, rtol=0, atol=1e-12 * np.linalg.norm(N))


def pair_scan(d):
    n = d.shape[1]
    return all(any(d[k, i] != d[k, j] for k in range(d.shape[0])) for i in range(n) for j in range(n) if i != j)


def test_separation_condition_examples():
    assert not separation_condition(DiagonalSet([[1, 1]]))
    assert separation_condition(DiagonalSet([[1, 1], [1, 2]]))
    assert separation_condition(DiagonalSet([[1, 2, 3]]))
    d = DiagonalSet([[0, 1e-9, 1]])
    assert separation_condition(d)
    assert not separation_condition(d, gap=1e-6)


def test_separation_condition_exhaustive():
    for n in range(1, 4):
        for m in range(1, 3):
            for bits in itertools.product([0, 1], repeat=n * m):
                d = np.array(bits, dtype=float).reshape(m, n)
                assert separation_condition(DiagonalSet(d)) == pair_scan(d)


def test_decompose_examples():
    assert decompose_transvections(np.eye(3)) == []
    assert decompose_transvections(np.array([[1, 5], [0, 1]])) == [Transvection(1, 2, 5)]
    f = decompose_transvections(np.array([[0, 1], [-1, 0]]))
    assert f == [Transvection(1, 2, 1), Transvection(2, 1, -1), Transvection(1, 2, 1)]
    np.testing.assert_array_equal(transvection_product(2, f), [[0, 1], [-1, 0]])


def test_decompose_errors():
    with pytest.raises(DeterminantError):
        decompose_transvections(np.diag([2.0, 1.0]))
    with pytest.raises(DimensionError):
        decompose_transvections(np.ones((2, 3)))


def test_decompose_needs_upward_help():
    # column 1 has nothing below its pivot, pivot != 1
    B = np.array([[2.0, 1.0], [0.0, 0.5]])
    f = decompose_transvections(B)
    np.testing.assert_allclose(transvection_product(2, f), B, atol=1e-15)


@pytest.mark.parametrize("real_only", [True, False])
def test_decompose_roundtrip(real_only):
    for n in range(2, 9):
        for s in range(20):
            B = random_sl(n, 1000 * n + s, real_only)
            f = decompose_transvections(B)
            err = np.linalg.norm(transvection_product(n, f) - B) / np.linalg.norm(B)
            assert err <= 1e-10
            for t in f:
                assert t.i != t.j
                assert off(transvection_matrix(n, t)) == t.a.real * t.a.real + t.a.imag * t.a.imag


def test_product_ensemble():
    rng = np.random.default_rng(0)
    C = rng.standard_normal((3, 4, 4))
    Z = np.zeros_like(C)
    np.testing.assert_array_equal(product_ensemble([(C, Z, 0.0)]), C)
    I = np.broadcast_to(np.eye(4), C.shape)
    np.testing.assert_array_equal(product_ensemble([(I, C, 0.0), (I, C, 0.0)]), I)
    C2, D1, D2 = (rng.standard_normal((3, 4, 4)) for _ in range(3))
    got = product_ensemble([(C, D1, 0.1), (C2, D2, 0.2)])
    for k in range(3):
        np.testing.assert_allclose(got[k], (C[k] + 0.1 * D1[k]) @ (C2[k] + 0.2 * D2[k]), atol=1e-14)
    with pytest.raises(ValueError):
        product_ensemble([])
    with pytest.raises(DimensionError):
        product_ensemble([(C, D1, 0.1), (C[:2], D1[:2], 0.1)])


@pytest.mark.parametrize("real_only", [True, False])
def test_random_setup(real_only):
    a, b = random_setup(4, 5, 11, real_only=real_only), random_setup(4, 5, 11, real_only=real_only)
    for x, y in [(a.U, b.U), (a.diag.d, b.diag.d), (a.R, b.R)]:
        np.testing.assert_array_equal(x, y)
    assert separation_condition(a.diag)
    assert is_unitary(a.U, 1e-10)
    np.testing.assert_allclose(np.linalg.norm(a.R, axis=(1, 2)), 1.0, rtol=1e-14)
    if real_only:
        assert not np.any(a.U.imag) and not np.any(a.diag.d.imag) and not np.any(a.R.imag)


def test_setup_validation():
    st = random_setup(3, 2, 0)
    with pytest.raises(ValueError):
        st.with_(U=2 * st.U)
    with pytest.raises(DimensionError):
        st.with_(R=st.R[:1])
    with pytest.raises(ValueError):
        st.with_(tpos=(2, 2))
    with pytest.raises(ValueError):
        random_setup(1, 2, 0)
