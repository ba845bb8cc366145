"""Caratheodory-number bound formulas and the integer-grid rank experiment.

All quantities here are combinatorial: binomial arithmetic for the bounds and
an exact rational rank for the grid measurement, so nothing depends on a
floating-point cutoff.
"""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass
from math import comb

import numpy as np

from .errors import BasisOverflowError, CapabilityError
from .numlin import exact_rank
from .poly_core import INT64_MAX, basis_size, enumerate_monomials

GRID_ENTRY_BUDGET = 10_000_000

MONOTONE_NOTE = ("kappa(V(n,2k)) <= kappa(V(n,2k+1)); the odd degree 2k+1 inherits "
                 "every lower bound reported for D=2k")


def _checked(value: int, what: str) -> int:
    if value > INT64_MAX:
        raise BasisOverflowError(f"{what} exceeds the int64 range")
    return value


@dataclass(frozen=True)
class BoundsRecord:
    n: int
    k: int
    D: int
    trivial_upper: int
    lower_item2: int
    upper_item3: int
    exact_d2: int | None
    asymptotic_ratio: float
    asymptotic_estimate: float
    monotone_chain_note: str

    def to_dict(self) -> dict:
        return asdict(self)


def caratheodory_bounds(n: int, k: int) -> BoundsRecord:
    """Bounds on the Caratheodory number of the degree-``2k`` Veronese variety in ``n`` variables.

    ``lower_item2`` is ``C(2k+n, n) - n C(k+n, n) + C(n, 2)`` and ``upper_item3``
    is ``C(2k+n, n) - n - 1``; the trivial upper bound is the ambient count
    ``m(n, 2k)``.  For ``k = 1`` the exact value ``n + 1`` is also reported.
    """
    if n < 1 or k < 1:
        raise ValueError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    D = 2 * k
    m = basis_size(n, D)
    mk = _checked(comb(k + n, n), f"C({k + n}, {n})")
    lower = _checked(m - n * mk + comb(n, 2), "lower bound")
    upper = m - n - 1
    ratio = float(f"{1.0 - n / 2.0 ** n:.6g}")
    return BoundsRecord(n=n, k=k, D=D, trivial_upper=m, lower_item2=lower, upper_item3=upper,
                        exact_d2=n + 1 if k == 1 else None, asymptotic_ratio=ratio,
                        asymptotic_estimate=float(f"{ratio * m:.6g}"),
                        monotone_chain_note=MONOTONE_NOTE)


@dataclass(frozen=True)
class GridMeasurement:
    n: int
    k: int
    grid_size: int
    restriction_rank: int
    vanishing_dim: int
    lower_bound: int
    lower_bound_check: bool

    def to_dict(self) -> dict:
        return asdict(self)

    def as_tuple(self):
        return self.grid_size, self.restriction_rank, self.vanishing_dim, self.lower_bound_check


def grid_matrix(n: int, k: int) -> np.ndarray:
    """Integer evaluation matrix of the degree-``2k`` monomials on ``{1..k}^n``."""
    m = basis_size(n, 2 * k)
    size = k ** n
    if size * m > GRID_ENTRY_BUDGET:
        raise CapabilityError(f"grid matrix {size}x{m} exceeds the {GRID_ENTRY_BUDGET} entry budget")
    exps = enumerate_monomials(n, 2 * k).exponent_array()
    grid = np.array(list(itertools.product(range(1, k + 1), repeat=n)), dtype=np.int64)
    # k**(2k) stays far below 2**63 for the budgeted sizes, but guard anyway
    if (2 * k) * np.log2(max(k, 1)) >= 62:
        raise BasisOverflowError("grid monomial values exceed the int64 range")
    return np.prod(grid[:, None, :] ** exps[None, :, :], axis=2)


def grid_vanishing_dimension(n: int, k: int) -> GridMeasurement:
    """Rank of degree-``2k`` restrictions to the grid ``{1..k}^n`` and its complement."""
    if n < 1 or k < 1:
        raise ValueError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    A = grid_matrix(n, k)
    r = exact_rank(A.tolist())
    m = A.shape[1]
    lower = caratheodory_bounds(n, k).lower_item2
    return GridMeasurement(n=n, k=k, grid_size=A.shape[0], restriction_rank=r,
                           vanishing_dim=m - r, lower_bound=lower,
                           lower_bound_check=r >= lower)
