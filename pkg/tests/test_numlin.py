from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import fraction_rank
from polynet.errors import DimensionError, EigenConvergenceError
from polynet.numlin import SymMatrix, exact_rank, lstsq, null_space, orthonormal_complement, rank, sym_eig
from polynet.poly_core import enumerate_monomials, evaluation_matrix


def test_symmatrix_symmetrizes():
    S = SymMatrix([[1.0, 2.0], [4.0, 3.0]])
    assert np.array_equal(S.entries, S.entries.T) and S.dim == 2
    with pytest.raises(DimensionError):
        SymMatrix(np.zeros((2, 3)))


def test_eig_examples():
    w, V = sym_eig(np.eye(3))
    np.testing.assert_allclose(w, [1, 1, 1])
    w, V = sym_eig(np.diag([2.0, 0.0]))
    np.testing.assert_allclose(w, [2, 0])
    np.testing.assert_allclose(np.abs(V), np.eye(2))


def test_eig_psd_samples():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = rng.integers(1, 12)
        B = rng.standard_normal((n, rng.integers(1, 12)))
        w, V = sym_eig(B @ B.T)
        assert w.min() >= -1e-9 * max(1.0, w.max())
        assert np.all(np.diff(w) <= 0)


@pytest.mark.parametrize("n", [1, 2, 5, 20, 50])
def test_eig_residual_and_shift(n):
    rng = np.random.default_rng(n)
    B = rng.standard_normal((n, n))
    A = B + B.T
    w, V = sym_eig(A)
    fro = np.linalg.norm(A)
    assert np.linalg.norm(A - (V * w) @ V.T) <= 1e-10 * max(1, fro)
    assert np.linalg.norm(V.T @ V - np.eye(n)) <= 1e-10
    np.testing.assert_allclose(w, np.linalg.eigvalsh(A)[::-1], atol=1e-10 * max(1, fro))
    w2, _ = sym_eig(A + 3.5 * np.eye(n))
    np.testing.assert_allclose(w2, w + 3.5, atol=1e-10 * max(1, fro))


def test_eig_small_eigenvalues_relative_accuracy():
    # graded diagonal: Jacobi keeps tiny eigenvalues to high relative accuracy
    rng = np.random.default_rng(1)
    d = 10.0 ** -np.arange(0, 12, 2.0)
    Q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    D = np.diag(d)
    w, _ = sym_eig(D)
    np.testing.assert_allclose(w, d, rtol=1e-12)
    w, _ = sym_eig(Q @ D @ Q.T)
    np.testing.assert_allclose(w[:3], d[:3], rtol=1e-9)


def test_eig_convergence_error():
    rng = np.random.default_rng(2)
    B = rng.standard_normal((30, 30))
    with pytest.raises(EigenConvergenceError):
        sym_eig(B + B.T, max_sweeps=1)


def test_null_space_examples():
    assert null_space(np.zeros((2, 3))).shape == (3, 3)
    assert null_space(np.eye(4)).shape == (4, 0)
    u, v = np.array([1.0, 2, 3]), np.array([0.5, -1, 2])
    Z = null_space(np.outer(u, v))
    assert Z.shape == (3, 2)
    np.testing.assert_allclose(Z.T @ Z, np.eye(2), atol=1e-12)
    assert np.linalg.norm(np.outer(u, v) @ Z) <= 1e-9 * np.linalg.norm(np.outer(u, v))


def test_rank_examples():
    assert rank(np.eye(4)) == 4
    assert rank(np.ones((3, 3))) == 1
    g = np.array([(i, j) for i in (1, 2) for j in (1, 2)], dtype=float)
    E = evaluation_matrix(g, enumerate_monomials(2, 4))
    assert rank(E) == 4 == fraction_rank(E.astype(int).tolist()) == exact_rank(E.astype(int))


@given(r=st.integers(0, 6), m=st.integers(1, 9), n=st.integers(1, 9), seed=st.integers(0, 2**31))
def test_rank_nullity(r, m, n, seed):
    rng = np.random.default_rng(seed)
    r = min(r, m, n)
    A = rng.standard_normal((m, r)) @ rng.standard_normal((r, n))
    Z = null_space(A)
    assert rank(A) == r
    assert rank(A) + Z.shape[1] == n
    if Z.size:
        np.testing.assert_allclose(Z.T @ Z, np.eye(Z.shape[1]), atol=1e-10)
        assert np.linalg.norm(A @ Z, axis=0).max() <= 1e-9 * max(np.linalg.norm(A), 1e-300)


@given(seed=st.integers(0, 2**31), m=st.integers(1, 7), n=st.integers(1, 7))
def test_exact_rank_matches_fraction_oracle(seed, m, n):
    rng = np.random.default_rng(seed)
    A = rng.integers(-2, 3, (m, n))
    A[:, 0] = A[:, -1] * 2  # force some dependence
    assert exact_rank(A.tolist()) == fraction_rank(A.tolist())
    F = [[Fraction(int(v), 3) for v in row] for row in A]
    assert exact_rank(F) == fraction_rank(A.tolist())


def test_lstsq_and_complement():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((6, 3))
    b = rng.standard_normal(6)
    np.testing.assert_allclose(lstsq(A, b), np.linalg.lstsq(A, b, rcond=None)[0], atol=1e-12)
    Q, _ = np.linalg.qr(rng.standard_normal((5, 2)))
    C = orthonormal_complement(Q, 5)
    assert C.shape == (5, 3)
    np.testing.assert_allclose(Q.T @ C, 0, atol=1e-12)
    assert orthonormal_complement(np.zeros((4, 0)), 4).shape == (4, 4)
