"""Monomial bases, polynomial evaluation and Veronese lifts.

Exponent vectors are ordered by total degree first and lexicographically
(ascending tuple order) inside a degree, so with two variables ``(x, y)`` the
degree-2 basis reads ``1, y, x, y^2, xy, x^2``.  Truncating a basis to a lower
degree is therefore a prefix operation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb
from typing import Sequence

import numpy as np

from .errors import BasisOverflowError, DimensionError

INT64_MAX = 2**63 - 1
NULL_TOL = 1e-9


def basis_size(n: int, D: int) -> int:
    """Number of monomials of degree at most ``D`` in ``n`` variables."""
    if n < 1 or D < 0:
        raise ValueError(f"need n >= 1 and D >= 0, got n={n}, D={D}")
    m = comb(n + D, n)
    if m > INT64_MAX:
        raise BasisOverflowError(f"C({n + D}, {n}) exceeds the int64 range")
    return m


@lru_cache(maxsize=128)
def _exponents(n: int, D: int) -> tuple[tuple[int, ...], ...]:
    out = []
    for deg in range(D + 1):
        block = []
        for combo in combinations_with_replacement(range(n), deg):
            e = [0] * n
            for v in combo:
                e[v] += 1
            block.append(tuple(e))
        out.extend(sorted(block))
    return tuple(out)


@dataclass(frozen=True)
class MonomialBasis:
    n: int
    D: int
    exponents: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.exponents)

    def exponent_array(self) -> np.ndarray:
        return _exponent_array(self.n, self.D)

    def index(self) -> dict[tuple[int, ...], int]:
        return _exponent_index(self.n, self.D)

    def degrees(self) -> np.ndarray:
        return self.exponent_array().sum(axis=1)


@lru_cache(maxsize=128)
def _exponent_array(n: int, D: int) -> np.ndarray:
    arr = np.array(_exponents(n, D), dtype=np.int64).reshape(-1, n)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=128)
def _exponent_index(n: int, D: int) -> dict[tuple[int, ...], int]:
    return {e: i for i, e in enumerate(_exponents(n, D))}


def enumerate_monomials(n: int, D: int) -> MonomialBasis:
    basis_size(n, D)
    return MonomialBasis(n, D, _exponents(n, D))


@dataclass(frozen=True)
class Poly:
    basis: MonomialBasis
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if c.shape[0] != self.basis.size:
            raise DimensionError(
                f"expected {self.basis.size} coefficients, got {c.shape[0]}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self) -> int:
        return self.basis.n

    @property
    def degree(self) -> int:
        return self.basis.D

    def __call__(self, x) -> float:
        return eval_poly(self, x)

    def evaluate(self, points) -> np.ndarray:
        """Values at every row of ``points``."""
        return evaluation_matrix(points, self.basis) @ self.coeffs

    def scale(self, points=None) -> float:
        """Magnitude bound ``||c||_1 * max(1, ||x||_inf)^D`` used for tolerances."""
        r = 1.0
        if points is not None:
            pts = np.asarray(points, dtype=float)
            if pts.size:
                r = max(1.0, float(np.abs(pts).max()))
        return float(np.abs(self.coeffs).sum()) * r**self.basis.D


def constant_poly(n: int, D: int, value: float) -> Poly:
    b = enumerate_monomials(n, D)
    c = np.zeros(b.size)
    c[0] = value
    return Poly(b, c)


def _int_power(base: np.ndarray, e: int) -> np.ndarray:
    # repeated multiplication for small exponents, squaring above 4
    if e == 0:
        return np.ones_like(base)
    if e <= 4:
        out = base.copy()
        for _ in range(e - 1):
            out = out * base
        return out
    result = np.ones_like(base)
    sq = base.copy()
    while e:
        if e & 1:
            result = result * sq
        e >>= 1
        if e:
            sq = sq * sq
    return result


def _power_table(points: np.ndarray, D: int) -> np.ndarray:
    """``table[k, i, j] = points[i, j] ** k`` for ``k = 0..D``."""
    N, n = points.shape
    table = np.empty((D + 1, N, n))
    for k in range(D + 1):
        table[k] = _int_power(points, k)
    return table


def _as_points(points, n: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        if pts.size == 0:
            pts = pts.reshape(0, n)
        else:
            pts = pts.reshape(1, -1)
    if pts.ndim != 2 or pts.shape[1] != n:
        raise DimensionError(f"points must have {n} columns, got shape {pts.shape}")
    return pts


def evaluation_matrix(points, basis: MonomialBasis) -> np.ndarray:
    """Matrix whose row ``i`` is the affine Veronese lift of point ``i``."""
    pts = _as_points(points, basis.n)
    N = pts.shape[0]
    exps = basis.exponent_array()
    if N == 0:
        return np.zeros((0, basis.size))
    table = _power_table(pts, basis.D)
    # advanced indices split by a slice land first: shape (m, n, N)
    picked = table[exps, :, np.arange(basis.n)]
    return np.prod(picked, axis=1).T.copy()


def eval_poly(p: Poly, x) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != p.basis.n:
        raise DimensionError(f"point has dimension {x.shape[0]}, polynomial has {p.basis.n}")
    return float(evaluation_matrix(x[None, :], p.basis)[0] @ p.coeffs)


def veronese_affine(x, D: int, truncated: bool = False) -> np.ndarray:
    """Vector of all monomials of degree <= D at ``x`` (constant first).

    With ``truncated=True`` the leading constant coordinate is dropped, giving
    the point of ``R^(m-1)``.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    v = evaluation_matrix(x[None, :], enumerate_monomials(x.shape[0], D))[0]
    return v[1:] if truncated else v


def homogeneous_exponents(n: int, D: int) -> np.ndarray:
    """Degree-exactly-D exponents in ``n + 1`` variables, aligned with the affine basis.

    Row ``i`` is ``(D - |a_i|, a_i)`` where ``a_i`` is the ``i``-th affine
    exponent, so setting the first coordinate to 1 reproduces the affine lift
    coordinate by coordinate.
    """
    exps = _exponent_array(n, D)
    lead = D - exps.sum(axis=1, keepdims=True)
    return np.hstack([lead, exps])


def veronese_homogeneous(x, D: int) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] < 1:
        raise DimensionError("homogeneous point needs at least one coordinate")
    n = x.shape[0] - 1
    if n == 0:
        return np.array([_int_power(x, D)[0]])
    exps = homogeneous_exponents(n, D)
    table = _power_table(x[None, :], D)[:, 0, :]
    cols = np.arange(n + 1)
    return np.prod(table[exps, cols], axis=1)


def vanishing_polynomials(points, basis: MonomialBasis, tol: float = NULL_TOL) -> list[Poly]:
    """Orthonormal basis of the polynomials in ``basis`` vanishing on ``points``."""
    from .numlin import null_space

    E = evaluation_matrix(points, basis)
    if E.shape[0] == 0:
        return [Poly(basis, row) for row in np.eye(basis.size)]
    Z = null_space(E, tol)
    return [Poly(basis, Z[:, i]) for i in range(Z.shape[1])]


def poly_mul(p: Poly, q: Poly) -> Poly:
    """Product of two polynomials, expressed in the basis of degree ``Dp + Dq``."""
    if p.n != q.n:
        raise DimensionError("polynomials live in different variable counts")
    basis = enumerate_monomials(p.n, p.degree + q.degree)
    idx = basis.index()
    out = np.zeros(basis.size)
    ep, eq = p.basis.exponents, q.basis.exponents
    for i in np.flatnonzero(p.coeffs):
        for j in np.flatnonzero(q.coeffs):
            e = tuple(a + b for a, b in zip(ep[i], eq[j]))
            out[idx[e]] += p.coeffs[i] * q.coeffs[j]
    return Poly(basis, out)


def poly_add_constant(p: Poly, c: float) -> Poly:
    coeffs = p.coeffs.copy()
    coeffs[0] += c
    return Poly(p.basis, coeffs)


def raise_degree(p: Poly, D: int) -> Poly:
    """Same polynomial written in the larger basis of degree ``D``."""
    if D < p.degree:
        raise ValueError("cannot lower the degree of a basis")
    coeffs = np.zeros(basis_size(p.n, D))
    coeffs[: p.basis.size] = p.coeffs
    return Poly(enumerate_monomials(p.n, D), coeffs)


def format_poly(p: Poly, names: Sequence[str] | None = None, digits: int = 6) -> str:
    names = list(names) if names else [f"x{i + 1}" for i in range(p.n)]
    terms = []
    for c, e in zip(p.coeffs, p.basis.exponents):
        if c == 0:
            continue
        mono = "*".join(
            (nm if k == 1 else f"{nm}^{k}") for nm, k in zip(names, e) if k)
        terms.append(f"{c:+.{digits}g}" + (f"*{mono}" if mono else ""))
    return " ".join(terms) if terms else "0"


@dataclass(frozen=True)
class PointCloud:
    """Weighted finite point set; weights are normalized to sum to one."""

    points: np.ndarray
    weights: np.ndarray

    def __init__(self, points, weights=None):
        pts = np.array(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("a point cloud needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        if weights is None:
            w = np.full(pts.shape[0], 1.0 / pts.shape[0])
        else:
            w = np.array(weights, dtype=float).reshape(-1)
            if w.shape[0] != pts.shape[0]:
                raise DimensionError("one weight per point is required")
            if np.any(w < 0) or not np.all(np.isfinite(w)):
                raise ValueError("weights must be finite and nonnegative")
            total = w.sum()
            if total <= 0:
                raise ValueError("weights must not all be zero")
            w = w / total
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def N(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def lift(self, D: int) -> np.ndarray:
        """Truncated Veronese lift (constant coordinate dropped) of every point."""
        return evaluation_matrix(self.points, enumerate_monomials(self.n, D))[:, 1:]

    def is_uniform(self) -> bool:
        return bool(np.all(self.weights == self.weights[0]))
