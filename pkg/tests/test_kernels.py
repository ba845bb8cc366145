"""Compiled and numpy kernels must agree; both are checked against brute force."""
import numpy as np
import pytest

from polynet import _backend, _pykernels

ck = _backend._ckernels
needs_compiled = pytest.mark.skipif(ck is None, reason="compiled kernels not built")

ON_TOL, DEP_TOL = 1e-10, 1e-9


def _cloud(seed, N, r, integer=False):
    rng = np.random.default_rng(seed)
    if integer:
        return rng.integers(-2, 3, (N, r)).astype(float)
    return rng.standard_normal((N, r))


def _same_set(A, B, tol=1e-7):
    """Every row of A is near a row of B and vice versa."""
    assert (A.shape[0] == 0) == (B.shape[0] == 0)
    if A.shape[0]:
        dist = np.linalg.norm(A[:, None, :] - B[None, :, :], axis=2)
        assert dist.min(axis=1).max() < tol and dist.min(axis=0).max() < tol


def test_backend_switching():
    before = _backend.backend_name()
    with _backend.use_backend("python"):
        assert _backend.backend_name() == "python"
        assert _backend.get_kernels() is _pykernels
    assert _backend.backend_name() == before
    with pytest.raises(ValueError):
        _backend.set_backend("fortran")


@needs_compiled
@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("r", [2, 3, 4])
@pytest.mark.parametrize("integer", [False, True])
def test_depth_scan_parity(seed, r, integer):
    V = _cloud(seed, 9, r, integer)
    V = V[np.linalg.norm(V, axis=1) > 0]
    w = np.full(V.shape[0], 1.0 / V.shape[0])
    a = _pykernels.depth_scan(V, w, 0.0, ON_TOL, DEP_TOL, 0, V.shape[0])
    b = ck.depth_scan(V, w, 0.0, ON_TOL, DEP_TOL, 0, V.shape[0])
    assert a[0] == pytest.approx(b[0], abs=1e-12)
    # the reported normal attains the reported value in both backends
    for best, _, sign, u, _ in (a, b):
        if np.isfinite(best):
            s = sign * (V @ u)
            scale = np.linalg.norm(V, axis=1)
            strict = w[s > ON_TOL * scale].sum()
            assert strict == pytest.approx(best, abs=1e-12)


@needs_compiled
@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("r", [2, 3, 4])
@pytest.mark.parametrize("integer", [False, True])
def test_constraint_scan_parity(seed, r, integer):
    V = _cloud(100 + seed, 10, r, integer)
    V = V[np.linalg.norm(V, axis=1) > 0]
    w = np.full(V.shape[0], 1.0 / V.shape[0])
    thr = 0.55  # off the k/N lattice, so no floating ties at the threshold
    a = _pykernels.constraint_scan(V, w, thr, ON_TOL, DEP_TOL, 0, V.shape[0])
    b = ck.constraint_scan(V, w, thr, ON_TOL, DEP_TOL, 0, V.shape[0])
    _same_set(a, b)
    for u in a:
        s = V @ u
        assert w[s >= -ON_TOL * np.linalg.norm(V, axis=1)].sum() > thr


@needs_compiled
def test_scan_ranges_partition():
    V = _cloud(7, 11, 3)
    w = np.full(11, 1 / 11)
    full = ck.constraint_scan(V, w, 0.5, ON_TOL, DEP_TOL, 0, 11)
    parts = np.vstack([ck.constraint_scan(V, w, 0.5, ON_TOL, DEP_TOL, lo, hi)
                       for lo, hi in [(0, 3), (3, 7), (7, 11)]])
    np.testing.assert_allclose(full, parts)


@pytest.mark.parametrize("mod", ["python", "cython"])
@pytest.mark.parametrize("seed", range(5))
def test_jacobi_matches_eigh(mod, seed):
    if mod == "cython" and ck is None:
        pytest.skip("compiled kernels not built")
    K = _pykernels if mod == "python" else ck
    rng = np.random.default_rng(seed)
    n = 3 + 4 * seed
    B = rng.standard_normal((n, n))
    A = B + B.T
    w, V, sweeps, conv = K.jacobi_eigh(A, 30, 1e-14)
    assert conv and sweeps <= 30
    np.testing.assert_allclose(np.sort(w), np.linalg.eigvalsh(A), atol=1e-11 * np.abs(A).max())
    np.testing.assert_allclose(V.T @ V, np.eye(n), atol=1e-12)
    np.testing.assert_allclose((V * w) @ V.T, A, atol=1e-11 * np.abs(A).max())
