"""Verification oracles: how little mass can a polynomial nonnegative on a net keep?

``exact_min_mass`` scans candidate kept sets in ascending mass order and asks an
LP whether some polynomial is ``>= 0`` on the net and ``<= -1`` off the set.
``heuristic_min_mass`` searches the cone of polynomials nonnegative on the net
(annealing plus greedy LP descent) and gives an upper bound.
``non_net_witness`` builds ``-Q^2 + eta`` from a polynomial ``Q`` vanishing on
a too-small candidate set.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from .errors import CapabilityError, DegenerateInputError, DimensionError
from .lpsolve import LinearProgram, OPTIMAL, lp_solve
from .poly_core import (Poly, PointCloud, basis_size, enumerate_monomials, evaluation_matrix,
                        poly_add_constant, poly_mul, raise_degree, vanishing_polynomials)

log = logging.getLogger(__name__)

EXACT_CAP = 20
KEEP_TOL = 1e-9
EXACT_SUBSET = "exact_subset"
HEURISTIC = "heuristic"
WITNESS = "witness"


@dataclass(frozen=True)
class AdversaryReport:
    worst_poly: Poly
    kept_mass: float
    kept_indices: np.ndarray
    method: str
    exact: bool
    degree: int
    extra: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "exact": bool(self.exact),
            "degree": int(self.degree),
            "kept_mass": float(self.kept_mass),
            "kept_indices": [int(i) for i in self.kept_indices],
            "worst_poly": self.worst_poly.coeffs.tolist(),
            "monomials": [list(e) for e in self.worst_poly.basis.exponents],
        }


def _scale(coeffs: np.ndarray, pts: np.ndarray, D: int) -> float:
    r = max(1.0, float(np.abs(pts).max())) if pts.size else 1.0
    return float(np.abs(coeffs).sum()) * r**D


def kept_set(p: Poly, cloud: PointCloud, net_points=None, tol: float = KEEP_TOL):
    """Indices of cloud points with ``P >= -tol*scale`` and whether ``P >= -tol*scale`` on the net."""
    pts = cloud.points
    allpts = pts if net_points is None or len(net_points) == 0 else np.vstack([pts, net_points])
    thr = tol * _scale(p.coeffs, allpts, p.degree)
    vals = p.evaluate(pts)
    kept = np.flatnonzero(vals >= -thr)
    net_ok = True
    if net_points is not None and len(net_points):
        net_ok = bool(np.all(p.evaluate(net_points) >= -thr))
    return kept, net_ok


def _report(p: Poly, cloud: PointCloud, net, method: str, exact: bool, **extra) -> AdversaryReport:
    kept, net_ok = kept_set(p, cloud, net)
    if not net_ok:
        raise ArithmeticError("adversary polynomial is negative on the net beyond tolerance")
    mass = float(cloud.weights[kept].sum())
    return AdversaryReport(p, mass, kept, method, exact, p.degree, extra=dict(extra))


def _as_cloud(cloud) -> PointCloud:
    return cloud if isinstance(cloud, PointCloud) else PointCloud(cloud)


def _net_array(net_points, n: int) -> np.ndarray:
    X = np.asarray(net_points, dtype=float)
    if X.size == 0:
        return np.zeros((0, n))
    X = X.reshape(-1, n) if X.ndim == 1 else X
    if X.shape[1] != n:
        raise DimensionError(f"net points must have {n} coordinates")
    return X


# --------------------------------------------------------------------------
# exact subset scan


def _subset_stream(weights: np.ndarray):
    """Index sets in ascending mass order, ties by lexicographic index tuple."""
    N = weights.shape[0]
    if np.all(weights == weights[0]):
        for s in range(N + 1):
            yield from combinations(range(N), s)
        return
    masks = np.arange(1 << N, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(N)) & 1
    masses = bits @ weights
    # mass comparisons at 1e-12 resolution so float summation order cannot matter
    keys = np.round(masses / 1e-12).astype(np.int64)
    subsets = [tuple(np.flatnonzero(b)) for b in bits]
    order = sorted(range(len(subsets)), key=lambda i: (keys[i], subsets[i]))
    for i in order:
        yield subsets[i]


def _subset_lp(En: np.ndarray, Ec: np.ndarray, S, tol: float):
    """Coefficients with ``En p >= 0`` and ``Ec[i] p <= -1`` for ``i`` not in ``S``, or None."""
    N, m = Ec.shape
    out = np.ones(N, dtype=bool)
    out[list(S)] = False
    A = np.vstack([-En, Ec[out]])
    b = np.concatenate([np.zeros(En.shape[0]), -np.ones(int(out.sum()))])
    if A.shape[0] == 0:
        return np.zeros(m)
    res = lp_solve(LinearProgram(np.zeros(m), (A, b)), tol)
    if res.status == OPTIMAL:
        return res.x
    return None


def exact_min_mass(cloud, net_points, D: int, cap: int = EXACT_CAP, tol: float = 1e-9,
                   workers: int = 1, block: int = 32) -> AdversaryReport:
    """Exact minimum kept mass over polynomials of degree ``<= D`` nonnegative on the net."""
    cloud = _as_cloud(cloud)
    n, N = cloud.n, cloud.N
    if N > cap:
        raise CapabilityError(f"exact adversary is capped at N <= {cap} (got N = {N})")
    X = _net_array(net_points, n)
    basis = enumerate_monomials(n, D)
    En = evaluation_matrix(X, basis)
    Ec = evaluation_matrix(cloud.points, basis)
    # cloud points that coincide with a net point are always kept
    forced = set()
    if X.shape[0]:
        for i, y in enumerate(cloud.points):
            if np.any(np.all(np.abs(X - y) <= 1e-12 * max(1.0, float(np.abs(y).max())), axis=1)):
                forced.add(i)
    stream = (S for S in _subset_stream(cloud.weights) if forced.issubset(S))
    lps = 0
    found = None

    def solve(S):
        return S, _subset_lp(En, Ec, S, tol)

    if workers <= 1:
        for S in stream:
            lps += 1
            _, p = solve(S)
            if p is not None:
                found = (S, p)
                break
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            while found is None:
                chunk = [S for _, S in zip(range(block * workers), stream)]
                if not chunk:
                    break
                for S, p in ex.map(solve, chunk):
                    lps += 1
                    if p is not None:
                        found = (S, p)
                        break
    if found is None:
        # P = 1 is always feasible, so only numerical trouble ends up here
        p = np.zeros(basis.size)
        p[0] = 1.0
        return _report(Poly(basis, p), cloud, X, EXACT_SUBSET, False, lps=lps,
                       note="no subset LP was feasible; reporting P = 1")
    S, p = found
    return _report(Poly(basis, p), cloud, X, EXACT_SUBSET, True, lps=lps, subset=list(S))


# --------------------------------------------------------------------------
# heuristic search


class _Cone:
    """Parameterization of polynomials nonnegative on the net points."""

    def __init__(self, En: np.ndarray, m: int):
        self.m = m
        k = En.shape[0]
        if k == 0:
            self.kind = "free"
            self.N = np.eye(m)
            self.R = np.zeros((m, 0))
            return
        U, s, Vt = np.linalg.svd(En, full_matrices=True)
        r = int(np.sum(s > 1e-10 * s[0])) if s.size else 0
        if r == k:
            # every value pattern on the net is attainable: p = N z + R v, v >= 0
            self.kind = "param"
            self.N = Vt[r:].T
            self.R = np.linalg.pinv(En)
        else:
            self.kind = "repair"
            self.N = np.eye(m)
            self.R = np.zeros((m, 0))
        self.En = En

    @property
    def dz(self) -> int:
        return self.N.shape[1]

    @property
    def dv(self) -> int:
        return self.R.shape[1]

    def coeffs(self, z, v):
        return self.N @ z + self.R @ np.abs(v)

    def repair(self, p, tol):
        """Nearest (in l1) coefficient vector with ``En p >= 0``; None if the LP fails."""
        if self.kind != "repair":
            return p
        En = self.En
        vals = En @ p
        if np.all(vals >= 0):
            return p
        m = self.m
        # variables (delta, s): min sum s, -s <= delta <= s, En (p + delta) >= 0
        c = np.concatenate([np.zeros(m), np.ones(m)])
        I = np.eye(m)
        A = np.vstack([np.hstack([I, -I]), np.hstack([-I, -I]),
                       np.hstack([-En, np.zeros((En.shape[0], m))])])
        b = np.concatenate([np.zeros(2 * m), vals])
        res = lp_solve(LinearProgram(c, (A, b)), tol)
        if res.status != OPTIMAL:
            return None
        return p + res.x[:m]


def _descend(p, En, Ec, w, ptscale, tol, max_lps=200):
    """Greedy LP descent: drop kept points one at a time while feasible."""

    def kept_of(q):
        return (Ec @ q) >= -KEEP_TOL * float(np.abs(q).sum()) * ptscale

    kept = kept_of(p)
    lps = 0
    improved = True
    while improved and lps < max_lps:
        improved = False
        order = np.flatnonzero(kept)
        order = order[np.argsort(-w[order], kind="stable")]
        for j in order:
            out = ~kept
            out[j] = True
            A = np.vstack([-En, Ec[out]])
            b = np.concatenate([np.zeros(En.shape[0]), -np.ones(int(out.sum()))])
            lps += 1
            res = lp_solve(LinearProgram(np.zeros(p.shape[0]), (A, b)), tol)
            if res.status == OPTIMAL:
                newkept = kept_of(res.x)
                if w[newkept].sum() < w[kept].sum() - 1e-15:
                    p, kept = res.x, newkept
                    improved = True
                    break
            if lps >= max_lps:
                break
    return p, lps


def heuristic_min_mass(cloud, net_points, D: int, seed: int = 0, iterations: int = 10_000,
                       tol: float = 1e-9, restarts: int = 8, descend: bool = True,
                       start_polys: Optional[list] = None) -> AdversaryReport:
    """Upper bound on the minimum kept mass by seeded simulated annealing.

    The search runs over ``p = N z + R |v|`` where ``N`` spans the polynomials
    vanishing on the net and ``R`` maps nonnegative net values to coefficients
    (when the net evaluation matrix has full row rank; otherwise candidates are
    repaired by an LP).  The energy is the kept mass plus a smooth surrogate
    that rewards pushing kept points below zero.  Improvements are polished by
    greedy LP descent, and every reported polynomial is re-verified directly.
    """
    cloud = _as_cloud(cloud)
    n = cloud.n
    X = _net_array(net_points, n)
    basis = enumerate_monomials(n, D)
    m = basis.size
    En = evaluation_matrix(X, basis)
    Ec = evaluation_matrix(cloud.points, basis)
    w = cloud.weights
    rng = np.random.Generator(np.random.Philox(seed))
    cone = _Cone(En, m)
    allpts = np.vstack([cloud.points, X]) if X.shape[0] else cloud.points
    ptscale = max(1.0, float(np.abs(allpts).max())) ** D
    # per-point normalization keeps the surrogate comparable across points
    rowscale = np.maximum(np.abs(Ec).sum(axis=1), 1e-300)

    def energy(p):
        s = max(float(np.abs(p).sum()), 1e-300)
        raw = Ec @ p
        kept = raw >= -KEEP_TOL * s * ptscale
        vals = raw / (rowscale * s)
        soft = float(w @ (1.0 / (1.0 + np.exp(-np.clip(vals / 1e-3, -50, 50)))))
        return float(w[kept].sum()) + 1e-3 * soft, kept

    best_p = np.zeros(m)
    best_p[0] = 1.0
    best_e, _ = energy(best_p)
    starts = []
    if start_polys:
        for q in start_polys:
            c = q.coeffs if isinstance(q, Poly) else np.asarray(q, dtype=float)
            starts.append(raise_degree(Poly(enumerate_monomials(n, len_degree(c, n)), c), D).coeffs)
    # witness start when the net is too small for the half degree
    Dh = D // 2
    if Dh >= 1 and X.shape[0] < basis_size(n, Dh):
        try:
            P, _ = non_net_witness(cloud, X, Dh)
            starts.append(raise_degree(P, D).coeffs)
        except DegenerateInputError:
            pass
    lps = 0
    for p0 in starts:
        e0, _ = energy(p0)
        if e0 < best_e:
            best_e, best_p = e0, p0.copy()
    steps_per = max(1, iterations // max(1, restarts))
    dz, dv = cone.dz, cone.dv
    seeds = []
    for r in range(restarts):
        z = rng.standard_normal(dz)
        v = rng.standard_normal(dv)
        nrm = np.sqrt(z @ z + v @ v) or 1.0
        z, v = z / nrm, v / nrm
        p = cone.coeffs(z, v)
        if cone.kind == "repair":
            p = cone.repair(p, tol)
            if p is None:
                continue
        e, _ = energy(p)
        run_p, run_e = p.copy(), e
        T0 = 0.05
        for it in range(steps_per):
            T = T0 * (1 - it / steps_per) + 1e-4
            step = 0.3 * (1 - it / steps_per) + 0.01
            z2 = z + step * rng.standard_normal(dz)
            v2 = v + step * rng.standard_normal(dv)
            nrm = np.sqrt(z2 @ z2 + v2 @ v2) or 1.0
            z2, v2 = z2 / nrm, v2 / nrm
            p2 = cone.coeffs(z2, v2)
            if cone.kind == "repair":
                p2 = cone.repair(p2, tol)
                if p2 is None:
                    continue
            e2, _ = energy(p2)
            if e2 <= e or rng.random() < np.exp(-(e2 - e) / T):
                z, v, p, e = z2, v2, p2, e2
                if e < run_e:
                    run_p, run_e = p.copy(), e
        seeds.append(run_p)
        if run_e < best_e:
            best_e, best_p = run_e, run_p.copy()
    if descend:
        # greedy descent from every restart's best state, not only the overall best
        for p0 in [best_p] + starts + seeds:
            pd, k = _descend(p0, En, Ec, w, ptscale, tol)
            lps += k
            ed, _ = energy(pd)
            if ed <= best_e:
                best_e, best_p = ed, pd
    rep = _report(Poly(basis, best_p), cloud, X, HEURISTIC, False, lps=lps,
                  iterations=iterations, seed=seed, cone=cone.kind)
    return rep


def len_degree(c, n: int) -> int:
    """Degree of a full coefficient vector of length m(n, D)."""
    size = len(c)
    D = 0
    while basis_size(n, D) < size:
        D += 1
    if basis_size(n, D) != size:
        raise DimensionError(f"{size} coefficients do not form a full basis in {n} variables")
    return D


# --------------------------------------------------------------------------
# non-net witness


def _witness(cloud: PointCloud, X: np.ndarray, D_half: int, tol: float):
    n = cloud.n
    basis = enumerate_monomials(n, D_half)
    if X.shape[0] >= basis.size:
        raise DegenerateInputError(
            f"|X| = {X.shape[0]} >= m(n, D_half) = {basis.size}: no vanishing polynomial is guaranteed")
    Qs = vanishing_polynomials(X, basis, tol)
    if not Qs:
        raise DegenerateInputError("the candidate set imposes independent conditions; no vanishing polynomial")
    Q = Qs[0]
    vals = Q.evaluate(cloud.points)
    nz = np.abs(vals) > 1e-9
    if not nz.any():
        raise DegenerateInputError("every cloud point lies on the zero set of Q; eta is undefined")
    eta = 0.5 * float(np.min(vals[nz] ** 2))
    Q2 = poly_mul(Q, Q)
    P = poly_add_constant(Poly(Q2.basis, -Q2.coeffs), eta)
    # P >= 0 exactly where Q^2 <= eta; deciding this on Q itself avoids the
    # cancellation in eta - Q^2 when eta is tiny
    kept = np.flatnonzero(vals ** 2 <= eta)
    if np.any(Q.evaluate(X) ** 2 > eta):
        raise ArithmeticError("witness polynomial is negative on the candidate set")
    return P, kept


def non_net_witness(cloud, X, D_half: int, tol: float = 1e-9):
    """Degree ``2*D_half`` polynomial ``-Q^2 + eta``, positive on ``X``, keeping little mass.

    ``Q`` is the first polynomial of degree ``D_half`` vanishing on ``X``;
    ``eta`` is half the least nonzero value of ``Q^2`` on the cloud.  Returns
    ``(P, kept_mass)``.
    """
    cloud = _as_cloud(cloud)
    P, kept = _witness(cloud, _net_array(X, cloud.n), D_half, tol)
    return P, float(cloud.weights[kept].sum())


def witness_report(cloud, X, D_half: int, tol: float = 1e-9) -> AdversaryReport:
    cloud = _as_cloud(cloud)
    P, kept = _witness(cloud, _net_array(X, cloud.n), D_half, tol)
    return AdversaryReport(P, float(cloud.weights[kept].sum()), kept, WITNESS, False, P.degree,
                           extra={"D_half": D_half})
