import numpy as np
import pytest

from polynet.adversary import exact_min_mass
from polynet.nets import NetCertificate, strong_net, weak_net_quadratic
from polynet.poly_core import PointCloud, basis_size, enumerate_monomials, evaluation_matrix


def _reconstruction_ok(cert):
    c = cert.lifted_centerpoint
    E = evaluation_matrix(cert.net_points, enumerate_monomials(cert.n, cert.degree))
    return np.linalg.norm(cert.weights @ E - c) <= 1e-7 * (1 + np.linalg.norm(c))


def test_weak_n1_three_points():
    cloud = PointCloud([[-1.0], [0.0], [1.0]])
    cert = weak_net_quadratic(cloud)
    assert cert.size <= 2 and cert.guarantee == pytest.approx(1 / 3)
    assert cert.check(cloud) == []
    rep = exact_min_mass(cloud, cert.net_points, 2)
    assert rep.kept_mass >= 1 / 3 - 1e-9


def test_weak_repeated_point():
    cloud = PointCloud(np.tile([[0.5, -1.5]], (5, 1)))
    cert = weak_net_quadratic(cloud)
    assert cert.size == 1
    np.testing.assert_allclose(cert.net_points[0], [0.5, -1.5], atol=1e-9)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_weak_size_bound(n):
    rng = np.random.default_rng(n)
    N = {1: 8, 2: 12, 3: 14, 4: 18, 5: 22}[n]
    cloud = PointCloud(rng.standard_normal((N, n)))
    cert = weak_net_quadratic(cloud, approximate=True)
    assert cert.size <= n + 1
    assert cert.guarantee == pytest.approx(2 / ((n + 1) * (n + 2)))
    assert _reconstruction_ok(cert)
    assert cert.reconstruction_residual <= 1e-7


@pytest.mark.parametrize("n,D", [(1, 1), (1, 3), (2, 1), (2, 2), (2, 3), (3, 1), (3, 2)])
def test_strong_size_bound(n, D):
    rng = np.random.default_rng(10 * n + D)
    cloud = PointCloud(rng.uniform(-1, 1, (16, n)))
    cert = strong_net(cloud, D, approximate=True)
    assert cert.size <= basis_size(n, D)
    assert cert.check(cloud) == []
    assert _reconstruction_ok(cert)
    idx = cert.extra["cloud_indices"]
    np.testing.assert_array_equal(cloud.points[idx], cert.net_points)


def test_strong_small_cloud_uses_support():
    cloud = PointCloud([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    cert = strong_net(cloud, 2)
    assert cert.size <= 3


def test_strong_degree_validation():
    with pytest.raises(ValueError):
        strong_net(PointCloud([[0.0]]), 0)


def test_certificate_roundtrip():
    rng = np.random.default_rng(3)
    cloud = PointCloud(rng.standard_normal((10, 2)))
    cert = weak_net_quadratic(cloud)
    back = NetCertificate.from_dict(cert.to_dict())
    np.testing.assert_array_equal(back.net_points, cert.net_points)
    np.testing.assert_array_equal(back.weights, cert.weights)
    assert back.guarantee == cert.guarantee and back.kind == cert.kind
    assert back.check() == []


@pytest.mark.parametrize("seed", range(6))
def test_guarantee_soundness_exact(seed):
    rng = np.random.default_rng(seed)
    n = 1 + seed % 2
    N = 8 + seed
    cloud = PointCloud(rng.uniform(-1, 1, (N, n)))
    for cert in (weak_net_quadratic(cloud), strong_net(cloud, 2)):
        rep = exact_min_mass(cloud, cert.net_points, cert.degree)
        assert rep.kept_mass >= cert.guarantee - 1e-9
        assert rep.kept_mass >= 0


@pytest.mark.parametrize("seed", range(3))
def test_weak_affine_equivariance_of_guarantee(seed):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, (10, 2))
    A = rng.standard_normal((2, 2)) + 2 * np.eye(2)
    t = rng.standard_normal(2)
    cloud = PointCloud(X)
    moved = PointCloud(X @ A.T + t)
    cert = weak_net_quadratic(cloud)
    cert2 = weak_net_quadratic(moved)
    assert cert.guarantee == cert2.guarantee
    # quadratics are closed under affine substitution, so the mapped net stays a net
    mapped = cert.net_points @ A.T + t
    assert exact_min_mass(moved, mapped, 2).kept_mass >= cert.guarantee - 1e-9
