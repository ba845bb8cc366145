"""Carathéodory decompositions.

``decompose_quadratic`` splits a PSD moment matrix with unit corner into at
most ``n + 1`` equally weighted atoms: factor ``M = Y Y^T`` from the spectrum,
then reflect the columns so that every column has the same first coordinate.
``caratheodory_prune`` is the classical elimination that shrinks a convex
combination to (affine dimension + 1) atoms along affine dependences.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import DimensionError, NotPSDError
from .numlin import SymMatrix, null_space, rank, sym_eig
from .poly_core import basis_size, enumerate_monomials

log = logging.getLogger(__name__)

PSD_TOL = 1e-8
CORNER_TOL = 1e-10


@dataclass(frozen=True)
class MomentMatrix:
    """Degree-2 moment matrix; row/column ``i`` stands for ``x_i`` with ``x_0 = 1``."""

    n: int
    M: np.ndarray

    def __post_init__(self):
        A = SymMatrix(self.M).entries.copy()
        if A.shape != (self.n + 1, self.n + 1):
            raise DimensionError(f"moment matrix for n={self.n} must be {(self.n + 1,) * 2}")
        if abs(A[0, 0] - 1.0) > CORNER_TOL:
            raise ValueError(f"corner entry must be 1, got {A[0, 0]!r}")
        A[0, 0] = 1.0
        A.setflags(write=False)
        object.__setattr__(self, "M", A)

    @property
    def mean(self) -> np.ndarray:
        return self.M[0, 1:].copy()

    def min_eigenvalue(self) -> float:
        return float(sym_eig(self.M)[0][-1])


@dataclass(frozen=True)
class AtomicMeasure:
    """Finite measure ``sum_i weights[i] * delta(points[i])``."""

    weights: np.ndarray
    points: np.ndarray
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        P = np.asarray(self.points, dtype=float)
        if P.ndim == 1:
            P = P.reshape(len(w), -1)
        if P.shape[0] != w.shape[0]:
            raise DimensionError("one point per weight is required")
        if np.any(w <= 0):
            raise ValueError("atom weights must be positive")
        if abs(w.sum() - 1.0) > 1e-10:
            raise ValueError(f"atom weights sum to {w.sum()!r}, expected 1")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "points", P)

    def __len__(self) -> int:
        return self.weights.shape[0]

    def moment_matrix(self) -> np.ndarray:
        H = np.hstack([np.ones((len(self), 1)), self.points])
        return (H * self.weights[:, None]).T @ H


def moment_matrix_from_lift(c, n: int) -> MomentMatrix:
    """Arrange a degree-2 lifted vector (constant coordinate first) as a moment matrix.

    A vector of length ``m(n, 2) - 1`` is taken to be the truncated lift and
    gets its leading 1 restored.
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    m = basis_size(n, 2)
    if c.shape[0] == m - 1:
        c = np.concatenate([[1.0], c])
    if c.shape[0] != m:
        raise DimensionError(f"lifted vector must have length {m} or {m - 1}, got {c.shape[0]}")
    if abs(c[0] - 1.0) > CORNER_TOL:
        raise ValueError(f"constant coordinate must be 1, got {c[0]!r}")
    idx = enumerate_monomials(n, 2).index()
    M = np.empty((n + 1, n + 1))
    M[0, 0] = 1.0
    unit = [tuple(int(a == i) for a in range(n)) for i in range(n)]
    for i in range(n):
        M[0, i + 1] = M[i + 1, 0] = c[idx[unit[i]]]
        for j in range(i, n):
            e = tuple(a + b for a, b in zip(unit[i], unit[j]))
            M[i + 1, j + 1] = M[j + 1, i + 1] = c[idx[e]]
    return MomentMatrix(n, M)


def _householder_to(r0: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Orthogonal symmetric H with ``r0 @ H = t`` (requires ``|r0| = |t|``)."""
    v = r0 - t
    nv = float(v @ v)
    k = r0.shape[0]
    if nv <= 1e-30 * max(1.0, float(t @ t)):
        return np.eye(k)
    return np.eye(k) - (2.0 / nv) * np.outer(v, v)


def decompose_quadratic(M, tol: float = 1e-9) -> AtomicMeasure:
    """Split a PSD unit-corner moment matrix into ``rank(M)`` atoms of weight ``1/rank``.

    The returned measure carries ``extra['residual']`` (relative Frobenius error
    of the reconstruction), ``extra['rank']`` and any borderline-eigenvalue
    ``extra['warnings']``.
    """
    if not isinstance(M, MomentMatrix):
        A = np.asarray(M, dtype=float)
        M = MomentMatrix(A.shape[0] - 1, A)
    A = M.M
    w, V = sym_eig(A)
    lam_max = max(float(w[0]), 0.0)
    if w[-1] < -PSD_TOL * max(1.0, lam_max):
        raise NotPSDError(f"moment matrix has eigenvalue {w[-1]:.3e} below -{PSD_TOL:g}")
    cutoff = tol * lam_max
    keep = w > cutoff
    warnings = []
    border = (w > cutoff / 10) & (w <= cutoff * 10)
    if border.any():
        warnings.append(
            f"eigenvalues {np.round(w[border], 15).tolist()} lie within 10x of the rank cutoff {cutoff:.3e}")
        log.warning(warnings[-1])
    k = int(keep.sum())
    Y = V[:, keep] * np.sqrt(w[keep])
    r0 = Y[0].copy()
    t = np.full(k, np.linalg.norm(r0) / np.sqrt(k))
    Z = Y @ _householder_to(r0, t)
    lead = Z[0]
    pts = (Z[1:] / lead).T
    weights = np.full(k, 1.0 / k)
    H = np.hstack([np.ones((k, 1)), pts])
    recon = (H * weights[:, None]).T @ H
    resid = float(np.linalg.norm(recon - A) / max(1.0, np.linalg.norm(A)))
    return AtomicMeasure(weights, pts, extra={"residual": resid, "rank": k, "warnings": warnings,
                                             "eigenvalues": w})


# --------------------------------------------------------------------------
# pruning


@dataclass(frozen=True)
class PrunedCombination:
    """Convex combination ``sum weights[i] * vectors[i]`` kept from the input ``indices``."""

    weights: np.ndarray
    vectors: np.ndarray
    indices: np.ndarray
    residual: float
    rounds: int
    exact_weights: Optional[list] = field(default=None, compare=False)


def _exact_null_vector(H):
    """First basis vector of ker(H) over the rationals, or None (RREF elimination)."""
    rows = [list(r) for r in H]
    m, n = len(rows), len(rows[0])
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    free = [c for c in range(n) if c not in pivots]
    if not free:
        return None
    f = free[0]
    v = [Fraction(0)] * n
    v[f] = Fraction(1)
    for i, c in enumerate(pivots):
        v[c] = -rows[i][f]
    return v


def caratheodory_prune(weights, vectors, target=None, tol: float = 1e-9,
                       exact: bool = False) -> PrunedCombination:
    """Shrink a convex combination to at most (affine dimension + 1) atoms.

    Repeatedly takes an affine dependence ``mu`` of the remaining atoms
    (``sum mu_i v_i = 0``, ``sum mu_i = 0``), moves the weights by ``-theta*mu``
    with the largest step keeping them nonnegative, and deletes the zeroed
    atom of smallest index.  With ``exact=True`` the arithmetic is done in
    rationals on the exact binary values of the inputs.
    """
    lam = np.asarray(weights, dtype=float).reshape(-1)
    Vv = np.asarray(vectors, dtype=float)
    if Vv.ndim == 1:
        Vv = Vv.reshape(-1, 1)
    if Vv.shape[0] != lam.shape[0]:
        raise DimensionError("one vector per weight is required")
    if np.any(lam < 0) or abs(lam.sum() - 1.0) > 1e-8:
        raise ValueError("weights must form a convex combination")
    recon0 = lam @ Vv
    tgt = recon0 if target is None else np.asarray(target, dtype=float).reshape(-1)
    if np.linalg.norm(recon0 - tgt) > max(tol, 1e-12) * (1 + np.linalg.norm(tgt)) * 10:
        raise ValueError("the weighted atoms do not reproduce the target")
    if exact:
        return _prune_exact(lam, Vv, tgt)
    idx = np.arange(lam.shape[0])
    keep = lam > 0
    lam, Vv, idx = lam[keep], Vv[keep], idx[keep]
    rounds = 0
    while lam.shape[0] > 1:
        Hm = np.vstack([Vv.T, np.ones(lam.shape[0])])
        ns = null_space(Hm, tol)
        if ns.shape[1] == 0:
            break
        mu = ns[:, 0]
        big = 1e-12 * np.abs(mu).max()
        if not np.any(mu > big):
            mu = -mu
        pos = mu > big
        ratios = np.full(mu.shape, np.inf)
        ratios[pos] = lam[pos] / mu[pos]
        j = int(np.argmin(ratios))            # first index among ties
        lam = lam - ratios[j] * mu
        lam[j] = 0.0
        drop = np.zeros(lam.shape[0], dtype=bool)
        drop[j] = True
        lam, Vv, idx = lam[~drop], Vv[~drop], idx[~drop]
        lam = np.maximum(lam, 0.0)
        rounds += 1
    # weights that cancelled to rounding level carry no mass
    tiny = lam <= 1e-15
    if tiny.any() and not tiny.all():
        lam, Vv, idx = lam[~tiny], Vv[~tiny], idx[~tiny]
    resid = float(np.linalg.norm(lam @ Vv - tgt))
    return PrunedCombination(lam, Vv, idx, resid, rounds)


def _prune_exact(lam_f, V_f, tgt):
    lam = [Fraction(float(x)) for x in lam_f]
    V = [[Fraction(float(x)) for x in row] for row in V_f]
    idx = [i for i in range(len(lam)) if lam[i] > 0]
    lam = [lam[i] for i in idx]
    V = [V[i] for i in idx]
    rounds = 0
    while len(lam) > 1:
        dim = len(V[0])
        Hm = [[V[i][c] for i in range(len(lam))] for c in range(dim)]
        Hm.append([Fraction(1)] * len(lam))
        mu = _exact_null_vector(Hm)
        if mu is None:
            break
        if not any(x > 0 for x in mu):
            mu = [-x for x in mu]
        j = min((i for i in range(len(mu)) if mu[i] > 0), key=lambda i: (lam[i] / mu[i], i))
        theta = lam[j] / mu[j]
        lam = [a - theta * b for a, b in zip(lam, mu)]
        del lam[j], V[j], idx[j]
        rounds += 1
    keep = [i for i in range(len(lam)) if lam[i] > 0]
    lam = [lam[i] for i in keep]
    V = [V[i] for i in keep]
    idx = [idx[i] for i in keep]
    recon = [sum((lam[i] * V[i][c] for i in range(len(lam))), Fraction(0)) for c in range(len(V[0]))]
    lam_arr = np.array([float(x) for x in lam])
    V_arr = np.array([[float(x) for x in r] for r in V])
    resid = float(np.linalg.norm(np.array([float(x) for x in recon]) - tgt))
    return PrunedCombination(lam_arr, V_arr, np.array(idx), resid, rounds, exact_weights=lam)


def affine_dimension(vectors, tol: float = 1e-9) -> int:
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    if V.shape[0] <= 1:
        return 0
    return rank(V[1:] - V[0], tol)
