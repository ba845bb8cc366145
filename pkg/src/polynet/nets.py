"""Net pipelines: lift, find a centerpoint in lifted space, decompose it.

``weak_net_quadratic`` turns the degree-2 lifted centerpoint into a moment
matrix and splits it into at most ``n + 1`` atoms (points anywhere in R^n).
``strong_net`` writes the lifted centerpoint as a convex combination of lifted
cloud points and prunes it to at most ``m(n, D)`` of them.

Either way the centerpoint ``c`` equals the weighted sum of the lifted net
points, so a polynomial nonnegative on the net is a linear functional
nonnegative at ``c``; its superlevel set is a closed half-space through a point
of depth ``depth_achieved`` and holds at least that much mass.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .decompose import caratheodory_prune, decompose_quadratic, moment_matrix_from_lift
from .depth import find_centerpoint
from .errors import InfeasibleError, NotPSDError
from .lpsolve import lp_feasible_point
from .poly_core import PointCloud, basis_size, evaluation_matrix, enumerate_monomials

log = logging.getLogger(__name__)

WEAK = "weak"
STRONG = "strong"
RESIDUAL_LIMIT = 1e-7


@dataclass(frozen=True)
class NetCertificate:
    net_points: np.ndarray
    weights: np.ndarray
    degree: int
    kind: str
    guarantee: float
    lifted_centerpoint: np.ndarray
    depth_achieved: float
    reconstruction_residual: float
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return self.net_points.shape[1]

    @property
    def size(self) -> int:
        return self.net_points.shape[0]

    def reconstruction(self) -> np.ndarray:
        E = evaluation_matrix(self.net_points, enumerate_monomials(self.n, self.degree))
        return self.weights @ E

    def check(self, cloud: Optional[PointCloud] = None) -> list[str]:
        """Invariant violations (empty list when the certificate is consistent)."""
        problems = []
        m = basis_size(self.n, self.degree)
        if abs(self.guarantee - 1.0 / m) > 1e-15:
            problems.append(f"guarantee {self.guarantee} != 1/{m}")
        if self.kind == WEAK and self.size > self.n + 1:
            problems.append(f"weak net has {self.size} > n+1 points")
        if self.size > m:
            problems.append(f"net has {self.size} > m(n,D) = {m} points")
        if np.any(self.weights <= 0) or abs(self.weights.sum() - 1) > 1e-10:
            problems.append("weights are not a convex combination")
        c = self.lifted_centerpoint
        err = np.linalg.norm(self.reconstruction() - c)
        if err > RESIDUAL_LIMIT * (1 + np.linalg.norm(c)):
            problems.append(f"reconstruction residual {err:.3e} too large")
        if self.kind == STRONG and cloud is not None:
            P = cloud.points
            for x in self.net_points:
                if not np.any(np.all(P == x, axis=1)):
                    problems.append(f"strong net point {x} is not a cloud point")
                    break
        return problems

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "degree": int(self.degree),
            "n": int(self.n),
            "guarantee": float(self.guarantee),
            "depth_achieved": float(self.depth_achieved),
            "reconstruction_residual": float(self.reconstruction_residual),
            "net_points": self.net_points.tolist(),
            "weights": self.weights.tolist(),
            "lifted_centerpoint": self.lifted_centerpoint.tolist(),
            "target_mass": float(self.extra.get("target_mass", float("nan"))),
            "intrinsic_dim": int(self.extra.get("intrinsic_dim", -1)),
            "warnings": list(self.extra.get("warnings", [])),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetCertificate":
        n = int(d["n"])
        pts = np.asarray(d["net_points"], dtype=float).reshape(-1, n)
        extra = {k: d[k] for k in ("target_mass", "intrinsic_dim", "warnings") if k in d}
        return cls(pts, np.asarray(d["weights"], dtype=float), int(d["degree"]), d["kind"],
                   float(d["guarantee"]), np.asarray(d["lifted_centerpoint"], dtype=float),
                   float(d["depth_achieved"]), float(d["reconstruction_residual"]), extra)


def _as_cloud(cloud) -> PointCloud:
    return cloud if isinstance(cloud, PointCloud) else PointCloud(cloud)


def _convex_weights(Y: np.ndarray, c: np.ndarray, tol: float, relax: float = 0.0):
    """Weights ``lam >= 0`` with ``sum lam = 1`` and ``lam @ Y = c``, maximizing ``min lam``."""
    N = Y.shape[0]
    A = -np.eye(N)
    b = np.zeros(N)
    E = np.vstack([Y.T, np.ones((1, N))])
    e = np.concatenate([c, [1.0]])
    if relax == 0.0:
        return lp_feasible_point((A, b), (E, e), tol, num_vars=N)
    band = relax * (1 + np.abs(e))
    A2 = np.vstack([A, E, -E])
    b2 = np.concatenate([b, e + band, -e + band])
    return lp_feasible_point((A2, b2), None, tol, num_vars=N)


def _centerpoint(cloud: PointCloud, D: int, tol: float, workers: int, approximate: bool):
    Y = cloud.lift(D)
    res = find_centerpoint(Y, cloud.weights, None, tol, workers=workers, approximate=approximate)
    return Y, res


def weak_net_quadratic(cloud, tol: float = 1e-9, workers: int = 1,
                       approximate: bool = False) -> NetCertificate:
    """Weak net of at most ``n + 1`` points for superlevel sets of quadratics."""
    cloud = _as_cloud(cloud)
    n = cloud.n
    m = basis_size(n, 2)
    Y, cp = _centerpoint(cloud, 2, tol, workers, approximate)
    c = cp.point
    warnings = []
    try:
        atoms = decompose_quadratic(moment_matrix_from_lift(c, n), tol)
    except NotPSDError as err:
        # the centerpoint slipped outside the lifted hull numerically; snap it
        # to an explicit convex combination of lifted cloud points and retry
        warnings.append(f"retry after {err}")
        lam = _convex_weights(Y, c, tol)
        if lam is None:
            lam = _convex_weights(Y, c, tol, relax=1e-7)
        if lam is None:
            raise
        lam = np.maximum(lam, 0.0)
        lam /= lam.sum()
        c = lam @ Y
        atoms = decompose_quadratic(moment_matrix_from_lift(c, n), tol)
    warnings.extend(atoms.extra["warnings"])
    full_c = np.concatenate([[1.0], c])
    E = evaluation_matrix(atoms.points, enumerate_monomials(n, 2))
    resid = float(np.linalg.norm(atoms.weights @ E - full_c))
    return NetCertificate(atoms.points, atoms.weights, 2, WEAK, 1.0 / m, full_c,
                          cp.depth.depth, resid,
                          extra={"target_mass": cp.target, "intrinsic_dim": cp.intrinsic_dim,
                                 "warnings": warnings, "depth_exact": cp.depth.exact,
                                 "num_constraints": cp.num_constraints})


def strong_net(cloud, D: int, tol: float = 1e-9, workers: int = 1,
               approximate: bool = False) -> NetCertificate:
    """Strong net of at most ``m(n, D)`` cloud points for degree-``D`` superlevel sets."""
    if D < 1:
        raise ValueError("degree must be at least 1")
    cloud = _as_cloud(cloud)
    n = cloud.n
    m = basis_size(n, D)
    Y, cp = _centerpoint(cloud, D, tol, workers, approximate)
    c = cp.point
    warnings = []
    lam = _convex_weights(Y, c, tol)
    if lam is None:
        warnings.append("convex weights needed the relaxed equality band 1e-7")
        lam = _convex_weights(Y, c, tol, relax=1e-7)
    if lam is None:
        raise InfeasibleError("lifted centerpoint is not a convex combination of lifted cloud points")
    lam = np.maximum(lam, 0.0)
    lam /= lam.sum()
    pruned = caratheodory_prune(lam, Y, target=c, tol=tol)
    w = pruned.weights / pruned.weights.sum()
    pts = cloud.points[pruned.indices]
    full_c = np.concatenate([[1.0], c])
    E = evaluation_matrix(pts, enumerate_monomials(n, D))
    resid = float(np.linalg.norm(w @ E - full_c))
    return NetCertificate(pts.copy(), w, D, STRONG, 1.0 / m, full_c, cp.depth.depth, resid,
                          extra={"target_mass": cp.target, "intrinsic_dim": cp.intrinsic_dim,
                                 "warnings": warnings, "depth_exact": cp.depth.exact,
                                 "num_constraints": cp.num_constraints,
                                 "cloud_indices": pruned.indices.tolist()})
