"""Matrix families built from a unitary ``U``, diagonal data and perturbations.

An ensemble is an array of shape ``(m, n, n)``.  Members are

* ``M0_k = U D_k U^H``                       (exactly jointly diagonalizable),
* ``Ml_k = U D_k U^H + lam R_k``             (perturbed),
* ``Mal_k = U K(d(k), a) U^H + lam R_k``     (transvection-deformed),
* ``Nal_k = K(d(k), a) + lam U^H R_k U``     (the same, centred at ``U``),

where ``K(d(k), a)`` is ``diag(d_1(k), ..., d_n(k))`` with ``a`` added at one
off-diagonal position shared by all ``k``.
"""
from dataclasses import dataclass, replace

import numpy as np

from .cost import as_ensemble
from .exceptions import DeterminantError, DimensionError, EliminationError
from .linalg import _gaussian, as_square, check_index, is_unitary, unitary_from_rng


@dataclass(frozen=True, eq=False)
class DiagonalSet:
    """Table ``d[k, i]`` holding the i-th diagonal entry of ``D_k``."""

    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.complex128)
        if d.ndim == 1:
            d = d[None]
        if d.ndim != 2 or d.size == 0:
            raise DimensionError(f"diagonal table must be (m, n), got shape {d.shape}")
        if not np.all(np.isfinite(d)):
            raise ValueError("diagonal table has non-finite entries")
        object.__setattr__(self, "d", d)

    @property
    def m(self):
        return self.d.shape[0]

    @property
    def n(self):
        return self.d.shape[1]

    def matrices(self):
        """The stack ``D_1, ..., D_m``."""
        out = np.zeros((self.m, self.n, self.n), dtype=np.complex128)
        idx = np.arange(self.n)
        out[:, idx, idx] = self.d
        return out


@dataclass(frozen=True)
class Transvection:
    """``I + a E_ij`` with 1-based ``i != j``."""

    i: int
    j: int
    a: complex = 0.0

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError(f"transvection needs i != j, got ({self.i}, {self.j})")


def transvection_matrix(n, t, diag_row=None):
    """``K(d, a)``: diagonal ``diag_row`` (all ones if omitted), ``a`` at ``(t.i, t.j)``."""
    i0, j0 = check_index(t.i, n, "i"), check_index(t.j, n, "j")
    if diag_row is None:
        K = np.eye(n, dtype=np.complex128)
    else:
        diag_row = np.asarray(diag_row, dtype=np.complex128)
        if diag_row.shape != (n,):
            raise DimensionError(f"diagonal row must have length {n}, got {diag_row.shape}")
        K = np.diag(diag_row)
    K[i0, j0] += t.a
    return K


def transvection_product(n, factors):
    """Ordered product of ``K(1, a)`` factors; the identity when empty."""
    P = np.eye(n, dtype=np.complex128)
    for t in factors:
        P = P @ transvection_matrix(n, t)
    return P


@dataclass(frozen=True, eq=False)
class PerturbationSetup:
    """Everything that defines one experiment.

    ``tpos`` is the 1-based transvection position shared by all members,
    ``lam`` the perturbation size and ``seed`` (if any) records provenance.
    """

    U: np.ndarray
    diag: DiagonalSet
    R: np.ndarray
    lam: float = 0.0
    a: complex = 0.0
    tpos: tuple = (1, 2)
    seed: int = None
    real_only: bool = False

    def __post_init__(self):
        U = as_square(self.U, "U")
        n = U.shape[0]
        if not is_unitary(U, 1e-10):
            raise ValueError("U must be unitary at tolerance 1e-10")
        if self.diag.n != n:
            raise DimensionError(f"diagonal set has n={self.diag.n}, U is {n}x{n}")
        R = as_ensemble(self.R, n)
        if R.shape[0] != self.diag.m:
            raise DimensionError(f"{R.shape[0]} perturbations for {self.diag.m} diagonal matrices")
        i, j = self.tpos
        check_index(i, n, "tpos i")
        check_index(j, n, "tpos j")
        if i == j:
            raise ValueError("transvection position must be off-diagonal")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "tpos", (int(i), int(j)))
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "a", complex(self.a))

    @property
    def n(self):
        return self.U.shape[0]

    @property
    def m(self):
        return self.diag.m

    def with_(self, **changes):
        return replace(self, **changes)

    def transvections(self):
        """Stack of ``K(d(k), a)`` for k = 1..m."""
        t = Transvection(*self.tpos, self.a)
        return np.stack([transvection_matrix(self.n, t, row) for row in self.diag.d])

    def centered_R(self):
        """Stack of ``U^H R_k U``."""
        return self.U.conj().T @ self.R @ self.U


def _conjugate(U, X):
    return U @ X @ U.conj().T


def build_M0(U, diag):
    U = as_square(U, "U")
    if diag.n != U.shape[0]:
        raise DimensionError(f"diagonal set has n={diag.n}, U is {U.shape[0]}x{U.shape[0]}")
    return _conjugate(U, diag.matrices())


def build_M_lambda(setup):
    return _conjugate(setup.U, setup.diag.matrices()) + setup.lam * setup.R


def build_M_a_lambda(setup):
    return _conjugate(setup.U, setup.transvections()) + setup.lam * setup.R


def build_N_a_lambda(setup):
    return setup.transvections() + setup.lam * setup.centered_R()


def separation_condition(diag, gap=None):
    """True iff every index pair ``i != j`` is told apart by some ``D_k``.

    With ``gap`` set, entries closer than ``gap`` count as equal.
    """
    d = diag.d
    n = d.shape[1]
    for i in range(n):
        for j in range(i + 1, n):
            diff = np.abs(d[:, i] - d[:, j])
            separated = np.any(diff > gap) if gap is not None else np.any(d[:, i] != d[:, j])
            if not separated:
                return False
    return True


def decompose_transvections(B, tol=1e-8):
    """Factor ``B`` in SL(n) into transvections ``K(1, a)``.

    Gauss-Jordan elimination where every row operation ``row_i += a row_j``
    is itself a transvection.  Each pivot is first forced to exactly 1 by
    adding a multiple of the largest-modulus row below it (smallest index
    on ties), so no diagonal rescaling is ever needed and the last pivot is
    the determinant.  Returns factors whose ordered product is ``B``.
    """
    B = np.array(as_square(B, "B"))
    n = B.shape[0]
    det = np.linalg.det(B)
    if abs(det - 1.0) > tol:
        raise DeterminantError(f"|det(B) - 1| = {abs(det - 1.0):.3e} exceeds {tol:.1e}")

    ops = []

    def row_op(i, j, a):
        if a != 0:
            B[i] += a * B[j]
            ops.append((i, j, a))

    for c in range(n):
        if c < n - 1 and B[c, c] != 1:
            below = np.abs(B[c + 1:, c])
            r = c + 1 + int(np.argmax(below))
            if below.max() <= tol:
                if abs(B[c, c]) <= tol:
                    raise EliminationError(f"column {c + 1} has no usable pivot")
                r = c + 1
                row_op(r, c, 1.0)
            row_op(c, r, (1.0 - B[c, c]) / B[r, c])
        if abs(B[c, c]) <= tol:
            raise EliminationError(f"column {c + 1} has no usable pivot")
        for r in range(n):
            if r != c and B[r, c] != 0:
                row_op(r, c, -B[r, c] / B[c, c])

    # B_final = E_r ... E_1 B_0, so B_0 = E_1^{-1} ... E_r^{-1}
    return [Transvection(i + 1, j + 1, complex(-a)) for i, j, a in ops]


def product_ensemble(factors):
    """Slot-wise product ``prod_r (C_r + lam_r D_r)`` of ensemble pairs."""
    if not factors:
        raise ValueError("need at least one factor")
    out = None
    for C, D, lam in factors:
        C, D = as_ensemble(C), as_ensemble(D)
        if C.shape != D.shape or (out is not None and out.shape != C.shape):
            raise DimensionError("all factor ensembles must share (m, n)")
        term = C + lam * D
        out = term if out is None else out @ term
    return out


def random_setup(n, m, seed, lam=0.0, a=0.0, real_only=False, tpos=(1, 2), zero_r=False):
    """Seeded experiment: Haar ``U``, Gaussian diagonals, unit-norm Gaussian ``R_k``."""
    if n < 2 or m < 1:
        raise ValueError(f"need n >= 2 and m >= 1, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    U = unitary_from_rng(rng, n, real_only)
    diag = DiagonalSet(_gaussian(rng, (m, n), real_only))
    while not separation_condition(diag):
        diag = DiagonalSet(_gaussian(rng, (m, n), real_only))
    R = _gaussian(rng, (m, n, n), real_only)
    R /= np.linalg.norm(R, axis=(1, 2), keepdims=True)
    if zero_r:
        R = np.zeros_like(R)
    return PerturbationSetup(U, diag, R, lam=lam, a=a, tpos=tpos, seed=seed, real_only=real_only)
