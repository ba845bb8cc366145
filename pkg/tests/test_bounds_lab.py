from math import comb

import numpy as np
import pytest

from conftest import fraction_rank
from polynet.bounds_lab import caratheodory_bounds, grid_matrix, grid_vanishing_dimension
from polynet.errors import BasisOverflowError, CapabilityError


def test_bounds_examples():
    b = caratheodory_bounds(2, 2)
    assert (b.trivial_upper, b.lower_item2, b.upper_item3) == (15, 4, 12)
    b = caratheodory_bounds(1, 2)
    assert (b.trivial_upper, b.lower_item2, b.upper_item3) == (5, 2, 3)
    assert caratheodory_bounds(2, 1).exact_d2 == 3
    assert caratheodory_bounds(2, 2).exact_d2 is None


@pytest.mark.parametrize("n", range(1, 7))
@pytest.mark.parametrize("k", range(1, 6))
def test_bounds_invariants(n, k):
    b = caratheodory_bounds(n, k)
    assert b.D == 2 * k
    assert b.lower_item2 <= b.trivial_upper and b.upper_item3 <= b.trivial_upper
    assert b.lower_item2 == comb(2 * k + n, n) - n * comb(k + n, n) + comb(n, 2)
    assert b.asymptotic_ratio == pytest.approx(1 - n / 2**n, rel=1e-6)
    assert b.monotone_chain_note


def test_bounds_errors():
    with pytest.raises(BasisOverflowError):
        caratheodory_bounds(100, 100_000)
    with pytest.raises(ValueError):
        caratheodory_bounds(0, 1)


def test_grid_examples():
    assert grid_vanishing_dimension(2, 2).as_tuple() == (4, 4, 11, True)
    g = grid_vanishing_dimension(1, 2)
    assert (g.grid_size, g.restriction_rank, g.vanishing_dim, g.lower_bound) == (2, 2, 3, 2)
    g = grid_vanishing_dimension(1, 1)
    assert (g.grid_size, g.restriction_rank) == (1, 1)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_grid_rank_properties(n, k):
    g = grid_vanishing_dimension(n, k)
    A = grid_matrix(n, k)
    assert g.restriction_rank == fraction_rank(A.tolist())
    assert g.restriction_rank <= min(g.grid_size, A.shape[1])
    assert g.lower_bound_check and g.restriction_rank >= caratheodory_bounds(n, k).lower_item2
    if g.grid_size < A.shape[1]:
        assert g.vanishing_dim >= 1


def test_grid_vanishing_polynomial_exists():
    # sum_i F(x_i)^2 with F(t) = (t-1)(t-2) vanishes on {1,2}^2 and has degree 4
    pts = np.array([(a, b) for a in (1, 2) for b in (1, 2)], float)
    F = lambda t: (t - 1) * (t - 2)
    assert np.all(F(pts[:, 0]) ** 2 + F(pts[:, 1]) ** 2 == 0)
    assert grid_vanishing_dimension(2, 2).vanishing_dim >= 1


def test_grid_budget():
    with pytest.raises(CapabilityError):
        grid_vanishing_dimension(6, 8)
