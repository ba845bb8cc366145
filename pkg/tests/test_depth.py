from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import brute_depth
from polynet import _backend
from polynet.depth import (affine_hull_reduce, centerpoint, exact_regime, find_centerpoint,
                           tukey_depth)
from polynet.errors import CapabilityError, DimensionError
from polynet.poly_core import PointCloud

TRI = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def test_triangle_examples():
    assert tukey_depth(TRI[1], TRI).depth == pytest.approx(1 / 3)
    assert tukey_depth(TRI.mean(axis=0), TRI).depth == pytest.approx(1 / 3)
    assert tukey_depth([5.0, 5.0], TRI).depth == 0.0


def test_certificate_invariants():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((15, 3))
    for q in [X.mean(axis=0), X[0], np.array([3.0, 0, 0])]:
        cert = tukey_depth(q, X)
        h = cert.witness
        assert abs(np.linalg.norm(h.normal) - 1) < 1e-12
        assert h.contains(q)
        assert 0 <= h.mass <= 1
        assert h.mass == pytest.approx(cert.depth, abs=1e-12)
        assert cert.exact


def test_dimension_errors():
    with pytest.raises(DimensionError):
        tukey_depth([0.0, 0.0, 0.0], TRI)
    with pytest.raises(ValueError):
        tukey_depth([np.nan, 0.0], TRI)


def test_repeated_points_and_weights():
    X = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    assert tukey_depth([0.0, 0.0], X).depth == pytest.approx(0.5)
    assert tukey_depth([0.0, 0.0], X, weights=[1, 0, 1, 1]).depth == pytest.approx(1 / 3)
    # all points equal: full mass at that point, 0 elsewhere
    same = np.ones((4, 2))
    assert tukey_depth([1.0, 1.0], same).depth == pytest.approx(1.0)
    assert tukey_depth([1.0, 1.5], same).depth == 0.0


@pytest.mark.parametrize("seed", range(12))
def test_against_brute_force(seed):
    rng = np.random.default_rng(seed)
    d = 1 + seed % 3
    N = 6 + seed % 7
    X = rng.standard_normal((N, d)) if seed % 2 else rng.integers(-2, 3, (N, d)).astype(float)
    w = np.full(N, 1.0 / N)
    for q in [X.mean(axis=0), X[0], X[:2].mean(axis=0)]:
        exact = tukey_depth(q, X).depth
        brute = brute_depth(q, X, w)
        assert exact <= brute + 1e-12
        assert exact == pytest.approx(brute, abs=1e-9)


def test_sampled_fallback_is_upper_bound():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((20, 3))
    q = X.mean(axis=0)
    ex = tukey_depth(q, X)
    ap = tukey_depth(q, X, exact=False, seed=1)
    assert not ap.exact and ap.depth >= ex.depth - 1e-12


def test_exact_regime_knob():
    assert exact_regime(40, 9, 8)
    assert not exact_regime(200, 20, 19, budget=1000)
    assert exact_regime(200, 20, 1, budget=1000)


@given(seed=st.integers(0, 2**31))
def test_affine_invariance(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4))
    X = rng.standard_normal((9, d))
    q = X[:3].mean(axis=0)
    A = rng.standard_normal((d, d)) + 2 * np.eye(d)
    t = rng.standard_normal(d)
    d0 = tukey_depth(q, X).depth
    d1 = tukey_depth(A @ q + t, X @ A.T + t).depth
    assert d0 == pytest.approx(d1, abs=1e-8)


@pytest.mark.parametrize("seed", range(4))
def test_removal_monotonicity(seed):
    rng = np.random.default_rng(seed)
    N = 7
    X = rng.integers(-2, 3, (N, 2)).astype(float)
    q = np.array([0.0, 0.0])
    w = rng.uniform(0.5, 1.5, N)
    w /= w.sum()
    base = tukey_depth(q, X, weights=w).depth
    for r in range(1, 3):
        for drop in combinations(range(N), r):
            keep = [i for i in range(N) if i not in drop]
            removed = w[list(drop)].sum()
            sub = tukey_depth(q, X[keep], weights=w[keep]).depth
            # both sides measured in the original (unnormalized) mass
            assert sub * (1 - removed) <= base + 1e-12
            assert sub * (1 - removed) >= base - removed - 1e-12


def test_workers_deterministic():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((18, 4))
    q = X[:5].mean(axis=0)
    a = tukey_depth(q, X, workers=1)
    b = tukey_depth(q, X, workers=4)
    assert a.depth == b.depth
    np.testing.assert_array_equal(a.witness.normal, b.witness.normal)


@pytest.mark.skipif(not _backend.compiled_available(), reason="compiled kernels not built")
def test_backends_agree_on_depth():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((14, 3))
    for q in [X.mean(axis=0), X[1], X[:2].mean(axis=0)]:
        with _backend.use_backend("python"):
            a = tukey_depth(q, X).depth
        with _backend.use_backend("cython"):
            b = tukey_depth(q, X).depth
        assert a == b


def test_affine_hull_reduce():
    t = np.linspace(0, 1, 5)[:, None]
    line = np.hstack([t, 2 * t, -t]) + 1.0
    f = affine_hull_reduce(line)
    assert f.dim == 1
    np.testing.assert_allclose(f.backward(f.forward(line)), line, atol=1e-10)
    assert affine_hull_reduce(np.ones((1, 3))).dim == 0
    rng = np.random.default_rng(0)
    G = rng.standard_normal((6, 4))
    f = affine_hull_reduce(G)
    assert f.dim == 4
    np.testing.assert_allclose(f.basis.T @ f.basis, np.eye(4), atol=1e-12)
    # isometry
    Y = f.forward(G)
    assert np.linalg.norm(Y[0] - Y[1]) == pytest.approx(np.linalg.norm(G[0] - G[1]))


def test_centerpoint_examples():
    q = centerpoint(TRI, 1 / 3)
    assert tukey_depth(q, TRI).depth >= 1 / 3 - 1e-9
    np.testing.assert_array_equal(centerpoint(np.array([[2.0, 3.0]]), 1.0), [2.0, 3.0])
    with pytest.raises(ValueError):
        centerpoint(TRI, 0.5)


@pytest.mark.parametrize("seed", range(5))
def test_centerpoint_lifted_cloud(seed):
    rng = np.random.default_rng(seed)
    cloud = PointCloud(rng.uniform(-1, 1, (12, 2)))
    Y = cloud.lift(2)
    res = find_centerpoint(Y)
    assert res.intrinsic_dim == 5 and res.target == pytest.approx(1 / 6)
    assert tukey_depth(res.point, Y).depth >= 2 / 12 - 1e-9
    assert res.depth.exact


def test_centerpoint_degenerate_hull():
    # points on a plane in R^3: intrinsic dim 2, target 1/3
    rng = np.random.default_rng(8)
    P = rng.standard_normal((10, 2))
    X = np.hstack([P, (P @ [1.0, -2.0])[:, None] + 0.5])
    res = find_centerpoint(X)
    assert res.intrinsic_dim == 2
    assert res.depth.depth >= 1 / 3 - 1e-9


def test_centerpoint_capability():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((60, 12))
    with pytest.raises(CapabilityError):
        find_centerpoint(X, budget=1000)
