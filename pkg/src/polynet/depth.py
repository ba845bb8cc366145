"""Tukey (half-space) depth and centerpoints of weighted point sets in R^d.

Depth is measured with closed half-spaces: the depth of ``q`` is the least mass
of a closed half-space whose boundary passes through ``q``.  The exact method
enumerates hyperplanes through ``q`` and ``d-1`` cloud points; a hyperplane that
carries extra cloud points is resolved recursively inside the hyperplane.

The center region ``{q : depth(q) >= tau}`` equals the intersection of all
closed half-spaces bounded by a hyperplane through ``d'`` affinely independent
cloud points whose closed side holds mass ``> 1 - tau``.  ``centerpoint`` builds
those half-spaces with the kernel, then picks the max-min-slack point by a
cutting-plane LP and confirms the result with the exact depth oracle.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Optional

import numpy as np

from . import _backend
from .errors import CapabilityError, DimensionError, InfeasibleError
from .lpsolve import LinearProgram, OPTIMAL, lp_solve

log = logging.getLogger(__name__)

ON_TOL = 1e-10          # |u.v| <= ON_TOL*|v| counts as on the hyperplane
DEP_TOL = 1e-9          # relative residual below which a subset is dependent
ZERO_TOL = 1e-10        # |x - q| <= ZERO_TOL*scale means x coincides with q
IMPROVE_TOL = 1e-12
EXACT_MAX_DIM = 9
EXACT_MAX_POINTS = 40
ENUM_BUDGET = 30_000_000
SAMPLE_DIRECTIONS = 20_000
DEDUP_RES = 1e-10


@dataclass(frozen=True)
class OrientedHalfspace:
    """Closed half-space ``{x : normal.x >= offset}`` with its cloud mass."""

    normal: np.ndarray
    offset: float
    mass: float

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(self.normal @ x >= self.offset - tol * max(1.0, float(np.abs(x).max(initial=0.0))))


@dataclass(frozen=True)
class DepthCertificate:
    point: np.ndarray
    depth: float
    witness: OrientedHalfspace
    exact: bool = True
    extra: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class AffineFrame:
    """Affine hull of a point set: ``x = origin + basis @ y`` for ``y`` in R^dim."""

    origin: np.ndarray
    basis: np.ndarray        # d x d', orthonormal columns

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    def forward(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x - self.origin) @ self.basis

    def backward(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return self.origin + y @ self.basis.T


def affine_hull_reduce(points, tol: float = 1e-9) -> AffineFrame:
    """Orthonormal frame of the affine hull of ``points`` (rows)."""
    X = np.atleast_2d(np.asarray(points, dtype=float))
    if X.shape[0] < 1:
        raise ValueError("need at least one point")
    origin = X.mean(axis=0)
    C = X - origin
    scale = max(1.0, float(np.abs(X).max()))
    if not np.any(np.abs(C) > 1e-14 * scale):
        return AffineFrame(origin, np.zeros((X.shape[1], 0)))
    _, s, vt = np.linalg.svd(C, full_matrices=False)
    r = int(np.sum(s > tol * s[0]))
    return AffineFrame(origin, vt[:r].T.copy())


def _cloud(points, weights):
    X = np.atleast_2d(np.asarray(points, dtype=float))
    if weights is None:
        w = np.full(X.shape[0], 1.0 / X.shape[0])
    else:
        w = np.asarray(weights, dtype=float).reshape(-1)
        if w.shape[0] != X.shape[0]:
            raise DimensionError("one weight per point is required")
        w = w / w.sum()
    return X, w


def _unpack(cloud, weights):
    if hasattr(cloud, "points") and hasattr(cloud, "weights"):
        return np.asarray(cloud.points, dtype=float), np.asarray(cloud.weights, dtype=float)
    return _cloud(cloud, weights)


# --------------------------------------------------------------------------
# partitioned kernel calls


def _ranges(N: int, workers: int):
    workers = max(1, int(workers))
    if workers == 1 or N < 2:
        return [(0, N)]
    # early first indices own far more subsets; interleave finer chunks
    bounds = np.unique(np.linspace(0, N, 4 * workers + 1).astype(int))
    return list(zip(bounds[:-1], bounds[1:]))


def _map_ranges(fn: Callable, N: int, workers: int):
    rngs = _ranges(N, workers)
    if len(rngs) == 1:
        return [fn(*rngs[0])]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda r: fn(*r), rngs))


def _depth_scan(W, w, z, workers):
    K = _backend.kernels
    parts = _map_ranges(lambda lo, hi: K.depth_scan(W, w, z, ON_TOL, DEP_TOL, lo, hi),
                        W.shape[0], workers)
    best, subset, sign, normal = np.inf, None, 0, None
    degs = []
    for val, sub, sg, nrm, deg in parts:
        if val < best - IMPROVE_TOL:
            best, subset, sign, normal = val, sub, sg, nrm
        degs.append(deg)
    deg = np.vstack(degs)
    if deg.shape[0]:
        deg = deg[np.minimum(deg[:, -2], deg[:, -1]) + z < best - IMPROVE_TOL]
    return best, subset, sign, normal, deg


def _constraint_scan(H, w, threshold, workers):
    K = _backend.kernels
    parts = _map_ranges(lambda lo, hi: K.constraint_scan(H, w, threshold, ON_TOL, DEP_TOL, lo, hi),
                        H.shape[0], workers)
    return np.vstack(parts)


# --------------------------------------------------------------------------
# exact depth


def _closed_mass(W, w, u, z):
    s = W @ u
    norms = np.linalg.norm(W, axis=1)
    return float(w[s >= -ON_TOL * norms].sum()) + z


def _perturb(W, u, on, v):
    """``u + eps*v`` with eps small enough that off-plane signs are preserved."""
    s = W @ u
    off = ~on
    dv = np.abs(W @ v)
    if not np.any(dv > 0):
        return u
    margin = float(np.abs(s[off]).min()) if off.any() else 1.0
    eps = 0.5 * margin / float(dv.max())
    out = u + eps * v
    return out / np.linalg.norm(out)


def _unique_rows(A, res=DEDUP_RES):
    if A.shape[0] == 0:
        return A
    keys = np.round(A / res).astype(np.int64)
    _, idx = np.unique(keys, axis=0, return_index=True)
    return A[np.sort(idx)]


def _min_closed(W, w, z, workers=1):
    """Least closed half-space mass through the origin over the rows ``W`` (all nonzero).

    ``z`` is mass sitting at the origin (always counted).  Returns
    ``(value, u)`` with ``u`` a unit vector in the coordinates of ``W`` whose
    closed side ``{u.x >= 0}`` attains the value.

    Hyperplanes carrying more rows than the spanning subset are resolved by
    recursing into the flat they cut out.  The recursion is a branch and
    bound: sub-problems are keyed by their row set, memoised, and only
    explored while they can still beat the best value found so far.
    """
    N, dim = W.shape
    if N == 0:
        u = np.zeros(dim)
        if dim:
            u[0] = 1.0
        return z, u
    memo: dict = {}
    value, u = _closed_search(W, w, np.arange(N), z, np.inf, workers, memo)
    nu = np.linalg.norm(u)
    u = u / nu
    realized = _closed_mass(W, w, u, z)
    if abs(realized - value) > 1e-9:
        log.warning("witness realizes mass %.17g, enumeration value %.17g", realized, value)
    return value, u


def _closed_search(W, w, idx, z, cutoff, workers, memo):
    """Least closed mass over directions in ``span(W[idx])`` of the rows ``idx``.

    Exact when the value is below ``cutoff``; otherwise returns some value
    ``>= cutoff`` (possibly ``inf`` with a ``None`` direction).  Directions are
    returned in the coordinates of ``W``.
    """
    key = idx.tobytes()
    hit = memo.get(key)
    if hit is not None:
        val, u, cut = hit
        if val < cut or cutoff <= cut:
            return val, u
    Wi, wi = W[idx], w[idx]
    _, s, vt = np.linalg.svd(Wi, full_matrices=False)
    r = max(1, int(np.sum(s > DEP_TOL * s[0])))
    B = vt[:r].T                       # dim x r
    P = Wi @ B
    norms = np.linalg.norm(P, axis=1)
    if r == 1:
        p = P[:, 0]
        pos = float(wi[p > 0].sum())
        neg = float(wi[p < 0].sum())
        u1 = np.array([1.0 if pos <= neg else -1.0])
        out = (min(pos, neg) + z, B @ u1)
        memo[key] = (*out, cutoff)
        return out
    # cheap upper bounds first (axis and point directions) so pruning starts tight
    extra = np.vstack([np.eye(r), -np.eye(r), P / norms[:, None], -P / norms[:, None]])
    masses = wi @ (P @ extra.T >= -ON_TOL * norms[:, None]) + z
    j = int(np.argmin(masses))
    best, best_u = float(masses[j]), extra[j]
    val, subset, sign, normal, deg = _depth_scan(P, wi, z, workers)
    if np.isfinite(val) and val < best - IMPROVE_TOL:
        u = sign * normal
        on = np.abs(P @ u) <= ON_TOL * norms
        v = np.linalg.lstsq(P[subset], -np.ones(len(subset)), rcond=None)[0]
        best, best_u = val, _perturb(P, u, on, v)
    if deg.shape[0]:
        deg = _unique_rows(deg)
        # most promising flats first
        order = np.argsort(np.minimum(deg[:, r], deg[:, r + 1]), kind="stable")
        for row in deg[order]:
            nrm = row[:r]
            for sg, side in ((1.0, row[r]), (-1.0, row[r + 1])):
                bound = min(best, cutoff)
                if side + z >= bound - IMPROVE_TOL:
                    continue
                u = sg * nrm
                on = np.abs(P @ u) <= ON_TOL * norms
                sv, vs = _closed_search(W, w, idx[on], 0.0, bound - side - z, workers, memo)
                if vs is None:
                    continue
                total = side + z + sv
                if total < best - IMPROVE_TOL:
                    best = total
                    best_u = _perturb(P, u, on, B.T @ vs)
    out = (best, B @ best_u)
    memo[key] = (*out, cutoff)
    return out


def _sampled_min(W, w, z, R, rng):
    """Upper bound on the least closed mass from random directions plus refinement."""
    N, dim = W.shape
    norms = np.linalg.norm(W, axis=1)
    U = rng.standard_normal((R, dim))
    U /= np.linalg.norm(U, axis=1)[:, None]
    U = np.vstack([U, np.eye(dim), -np.eye(dim), W / norms[:, None], -W / norms[:, None]])

    def masses(dirs):
        return w @ (W @ dirs.T >= -ON_TOL * norms[:, None]) + z

    m = masses(U)
    order = np.argsort(m, kind="stable")[:10]
    best = float(m[order[0]])
    best_u = U[order[0]]
    # local refinement: shrinking random perturbations around the best directions
    for i in order:
        u = U[i]
        cur = float(m[i])
        step = 0.5
        while step > 1e-4:
            cand = u[None, :] + step * rng.standard_normal((64, dim))
            cand /= np.linalg.norm(cand, axis=1)[:, None]
            cm = masses(cand)
            k = int(np.argmin(cm))
            if cm[k] < cur - IMPROVE_TOL:
                cur, u = float(cm[k]), cand[k]
            else:
                step *= 0.5
        if cur < best - IMPROVE_TOL:
            best, best_u = cur, u
    return best, best_u


def exact_regime(N: int, dim: int, subset_size: int, budget: int = ENUM_BUDGET) -> bool:
    """Whether hyperplane enumeration over ``subset_size``-subsets is affordable."""
    if subset_size <= 1:
        return True
    return (dim <= EXACT_MAX_DIM and N <= EXACT_MAX_POINTS) or comb(N, subset_size) <= budget


def tukey_depth(q, cloud, weights=None, tol: float = 1e-9, exact: Optional[bool] = None,
                workers: int = 1, samples: int = SAMPLE_DIRECTIONS, seed: int = 0) -> DepthCertificate:
    """Closed half-space depth of ``q`` with respect to a weighted point set.

    ``cloud`` is a :class:`PointCloud` or an ``N x d`` array (then ``weights``
    defaults to uniform).  Outside the exact regime (or with ``exact=False``)
    the value comes from sampled directions and is an upper bound; the
    certificate's ``exact`` flag records which.
    """
    X, w = _unpack(cloud, weights)
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.shape[0] != X.shape[1]:
        raise DimensionError(f"point has dimension {q.shape[0]}, cloud has {X.shape[1]}")
    if not np.all(np.isfinite(q)):
        raise ValueError("query point must be finite")
    d = X.shape[1]
    V = X - q
    scale = max(1.0, float(np.abs(X).max()), float(np.abs(q).max()))
    at_q = np.linalg.norm(V, axis=1) <= ZERO_TOL * scale
    z = float(w[at_q].sum())
    Wn, wn = V[~at_q], w[~at_q]
    if Wn.shape[0]:
        _, s, vt = np.linalg.svd(Wn, full_matrices=False)
        r = int(np.sum(s > DEP_TOL * s[0]))
    else:
        r = 0
    use_exact = exact_regime(Wn.shape[0], r, r - 1) if exact is None else exact
    if use_exact:
        value, u = _min_closed(Wn, wn, z, workers)
    else:
        B = vt[:r].T
        value, ub = _sampled_min(Wn @ B, wn, z, samples, np.random.default_rng(seed))
        u = B @ ub
    nu = np.linalg.norm(u)
    if nu == 0:
        u = np.zeros(d)
        u[0] = 1.0
    else:
        u = u / nu
    # closed mass of the witness in the original coordinates
    s_all = V @ u
    inside = (s_all >= -ON_TOL * np.linalg.norm(V, axis=1)) | at_q
    wmass = float(w[inside].sum())
    witness = OrientedHalfspace(u, float(u @ q), wmass)
    depth = float(min(max(value, 0.0), 1.0))
    return DepthCertificate(q.copy(), depth, witness, bool(use_exact),
                            extra={"span_rank": r, "at_point_mass": z})


# --------------------------------------------------------------------------
# centerpoint


@dataclass(frozen=True)
class CenterpointResult:
    point: np.ndarray
    target: float
    intrinsic_dim: int
    depth: DepthCertificate
    num_constraints: int
    slack: float
    cuts: int = 0
    exact: bool = True


def _center_constraints(Y, w, tau, workers):
    """Rows ``(A, b)`` of ``A y <= b`` describing the tau-center region of ``Y``."""
    N, dp = Y.shape
    H = np.hstack([Y, np.ones((N, 1))])
    U = _constraint_scan(H, w, 1.0 - tau + 1e-12, workers)
    a, beta = U[:, :dp], U[:, dp]
    na = np.linalg.norm(a, axis=1)
    keep = na > 1e-14
    a, beta, na = a[keep], beta[keep], na[keep]
    # closed side  a.y + beta >= 0   <=>   -a.y <= beta, normalized to unit rows
    A = -a / na[:, None]
    b = beta / na
    rows = _unique_rows(np.hstack([A, b[:, None]]))
    return rows[:, :dp], rows[:, dp]


def _chebyshev_cutting_plane(A, b, tol, always=0, batch=200, cap=1e6):
    """Max-min-slack point of ``A y <= b`` (unit rows), adding violated rows lazily.

    The last ``always`` rows (a bounding box) are active from the start so that
    every intermediate LP is bounded.
    """
    M, dp = A.shape
    active = np.zeros(M, dtype=bool)
    if always:
        active[M - always:] = True
    # seed with the rows tightest at the frame origin (the cloud mean)
    active[np.argsort(b, kind="stable")[:batch]] = True
    for _ in range(1000):
        idx = np.flatnonzero(active)
        Aa = np.zeros((idx.size + 1, dp + 1))
        Aa[:-1, :dp] = A[idx]
        Aa[:-1, dp] = 1.0
        Aa[-1, dp] = 1.0
        ba = np.concatenate([b[idx], [cap]])
        c = np.zeros(dp + 1)
        c[-1] = -1.0
        res = lp_solve(LinearProgram(c, (Aa, ba)), tol)
        if res.status != OPTIMAL:
            raise InfeasibleError(f"center-region LP returned {res.status}")
        y, t = res.x[:dp], res.x[dp]
        slack = b - A @ y
        viol = (slack < t - 1e-12 * max(1.0, abs(t))) & ~active
        if not viol.any():
            return y, float(t)
        cand = np.flatnonzero(viol)
        add = cand[np.argsort(slack[cand], kind="stable")[:batch]]
        active[add] = True
    raise InfeasibleError("cutting-plane loop did not settle")


def find_centerpoint(cloud, weights=None, target: Optional[float] = None, tol: float = 1e-9,
                     workers: int = 1, approximate: bool = False, budget: int = ENUM_BUDGET,
                     max_cuts: int = 50) -> CenterpointResult:
    """Centerpoint with full bookkeeping; see :func:`centerpoint`."""
    X, w = _unpack(cloud, weights)
    frame = affine_hull_reduce(X)
    dp = frame.dim
    tau = 1.0 / (dp + 1) if target is None else float(target)
    if tau > 1.0 / (dp + 1) + tol:
        raise ValueError(f"target {tau} exceeds 1/(d'+1) = {1.0 / (dp + 1)} for intrinsic dim {dp}")
    if dp == 0:
        q = frame.origin.copy()
        cert = tukey_depth(q, X, w)
        return CenterpointResult(q, tau, 0, cert, 0, 0.0)
    Y = frame.forward(X)
    N = Y.shape[0]
    exact = exact_regime(N, dp, dp, budget)
    if not exact and not approximate:
        raise CapabilityError(
            f"exact center region needs C({N},{dp}) = {comb(N, dp)} hyperplanes, over budget {budget}")
    lo, hi = Y.min(axis=0), Y.max(axis=0)
    box_A = np.vstack([np.eye(dp), -np.eye(dp)])
    box_b = np.concatenate([hi, -lo])
    if exact:
        A, b = _center_constraints(Y, w, tau, workers)
        A = np.vstack([A, box_A])
        b = np.concatenate([b, box_b])
    else:
        A, b = box_A, box_b
    cuts = 0
    rng = np.random.default_rng(0)
    while True:
        # witness cuts are appended after the box, so the box sits just before them
        nbox = 2 * dp + cuts
        y, t = _chebyshev_cutting_plane(A, b, tol, always=nbox)
        if t < -tol * max(1.0, float(np.abs(Y).max())):
            raise InfeasibleError(f"center region for target {tau} is empty (slack {t:.3e})")
        if exact:
            cert = tukey_depth(y, Y, w, workers=workers)
        else:
            cert = tukey_depth(y, Y, w, exact=False, seed=int(rng.integers(2**31)))
        if cert.depth >= tau - tol or cuts >= max_cuts:
            break
        # the witness half-space has too little mass: cut y off at the next level
        u = cert.witness.normal
        s = Y @ u
        below = s[s < u @ y - ON_TOL * max(1.0, float(np.abs(Y).max()))]
        level = float(below.max()) if below.size else float(s.min())
        A = np.vstack([A, u[None, :]])
        b = np.concatenate([b, [level]])
        cuts += 1
    q = frame.backward(y)
    full = tukey_depth(q, X, w, exact=None if exact else False, workers=workers)
    return CenterpointResult(q, tau, dp, full, int(A.shape[0]), float(t), cuts, exact and full.exact)


def centerpoint(cloud, target_mass: Optional[float] = None, tol: float = 1e-9, weights=None,
                **kwargs) -> np.ndarray:
    """A point of Tukey depth at least ``target_mass`` (default ``1/(d'+1)``).

    ``d'`` is the dimension of the affine hull of the cloud.  Raises
    :class:`CapabilityError` when the hyperplane enumeration exceeds the budget
    (pass ``approximate=True`` to fall back to sampled depth cuts) and
    :class:`InfeasibleError` if the center region is found empty.
    """
    return find_centerpoint(cloud, weights, target_mass, tol, **kwargs).point
