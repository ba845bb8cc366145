"""Dense linear algebra used throughout: symmetric eigenproblems, rank, null spaces.

The eigensolver is cyclic Jacobi (run by the active kernel backend), which keeps
good relative accuracy on small eigenvalues; rank decisions for PSD matrices
rely on that.  Rank and null space use column-pivoted QR and switch to an SVD
when a pivot sits too close to the cutoff to be trusted.
"""
from __future__ import annotations

from dataclasses import dataclass
import math
from fractions import Fraction

import numpy as np
import scipy.linalg as sla

from . import _backend
from .errors import DimensionError, EigenConvergenceError

DEFAULT_TOL = 1e-9
MAX_SWEEPS = 30


@dataclass(frozen=True)
class SymMatrix:
    """Symmetric matrix; construction symmetrizes the input exactly."""

    entries: np.ndarray

    def __init__(self, entries):
        A = np.array(entries, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionError(f"symmetric matrix must be square, got {A.shape}")
        S = 0.5 * (A + A.T)
        S.setflags(write=False)
        object.__setattr__(self, "entries", S)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def sym_eig(A, tol: float = DEFAULT_TOL, max_sweeps: int = MAX_SWEEPS):
    """Eigen-decomposition of a symmetric matrix, eigenvalues in descending order.

    Returns ``(w, V)`` with orthonormal columns ``V[:, i]``.  Raises
    :class:`EigenConvergenceError` when the off-diagonal mass does not drop
    below ``eps``-level after ``max_sweeps`` cyclic sweeps.
    """
    S = A if isinstance(A, SymMatrix) else SymMatrix(A)
    M = S.entries
    if M.shape[0] == 0:
        return np.zeros(0), np.zeros((0, 0))
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    # the sweep target sits far below ``tol``; ``tol`` is the acceptance level
    w, V, sweeps, converged = _backend.kernels.jacobi_eigh(M, max_sweeps, 1e-14)
    if not converged:
        resid = np.linalg.norm(M - (V * w) @ V.T)
        if resid > tol * max(1.0, np.linalg.norm(M)):
            raise EigenConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps (residual {resid:.3e})")
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


def _pivoted_r_diag(A: np.ndarray):
    Q, R, piv = sla.qr(A, mode="economic", pivoting=True)
    return Q, np.abs(np.diag(R)), piv


def rank(A, tol: float = DEFAULT_TOL) -> int:
    """Numerical rank under the relative cutoff ``tol * (largest singular value)``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.size == 0:
        return 0
    _, d, _ = _pivoted_r_diag(A)
    if d.size == 0 or d[0] == 0.0:
        return 0
    cutoff = tol * d[0]
    r = int(np.sum(d > cutoff))
    # QR pivots only bracket singular values; refine near the cutoff
    near = (d > cutoff / 10) & (d <= cutoff * 10)
    if near.any():
        s = np.linalg.svd(A, compute_uv=False)
        r = int(np.sum(s > tol * s[0]))
    return r


def null_space(A, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the right null space of ``A``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    if m == 0 or not np.any(A):
        return np.eye(n)
    # QR of A^T: the trailing columns of the full Q span ker(A)
    Q, R, piv = sla.qr(A.T, mode="full", pivoting=True)
    d = np.abs(np.diag(R))
    cutoff = tol * d[0]
    r = int(np.sum(d > cutoff))
    near = (d > cutoff / 10) & (d <= cutoff * 10)
    if near.any():
        _, s, vt = np.linalg.svd(A, full_matrices=True)
        r = int(np.sum(s > tol * s[0]))
        return vt[r:].T.copy()
    return Q[:, r:].copy()


def lstsq(A, b, tol: float = DEFAULT_TOL):
    """Minimum-norm least-squares solution with the same relative cutoff."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    x, *_ = np.linalg.lstsq(A, b, rcond=tol)
    return x


def orthonormal_complement(Q: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis of the complement of span(Q columns) in R^dim."""
    if Q.size == 0:
        return np.eye(dim)
    return null_space(Q.T)


def exact_rank(A) -> int:
    """Rank over the rationals of a matrix with integer (or Fraction) entries.

    Fraction-free Bareiss elimination on Python integers; used where a
    floating cutoff could misjudge a combinatorial dimension.
    """
    rows = [list(r) for r in A]
    if not rows:
        return 0
    if any(isinstance(v, Fraction) for r in rows for v in r):
        den = 1
        for r in rows:
            for v in r:
                den = math.lcm(den, Fraction(v).denominator)
        rows = [[int(Fraction(v) * den) for v in r] for r in rows]
    else:
        rows = [[int(v) for v in r] for r in rows]
    m, n = len(rows), len(rows[0])
    r = 0
    prev = 1
    for c in range(n):
        piv = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][c]
        for i in range(r + 1, m):
            f = rows[i][c]
            rows[i] = [(p * rows[i][j] - f * rows[r][j]) // prev for j in range(n)]
        prev = p
        r += 1
        if r == m:
            break
    return r
