"""Pure-numpy fallback for the compiled kernels in ``_kernels.pyx``.

Both modules expose the same three functions with the same signatures and
return conventions; ``polynet._backend`` picks one at import time.
"""
from __future__ import annotations

from itertools import combinations, islice

import numpy as np

BATCH = 4096
IMPROVE_TOL = 1e-12


def _subset_batches(N: int, k: int, lo: int, hi: int):
    """Lexicographic k-subsets of range(N) whose first element lies in [lo, hi)."""
    for first in range(lo, min(hi, N - k + 1)):
        rest = combinations(range(first + 1, N), k - 1)
        while True:
            chunk = list(islice(rest, BATCH))
            if not chunk:
                break
            arr = np.empty((len(chunk), k), dtype=np.int64)
            arr[:, 0] = first
            if k > 1:
                arr[:, 1:] = chunk
            yield arr


def _normals(rows: np.ndarray, subsets: np.ndarray, dep_tol: float):
    """Unit normals of the spans of ``rows[subset]`` plus an independence mask."""
    A = rows[subsets]                       # (B, k, r)
    norms = np.linalg.norm(A, axis=2)
    A = A / np.where(norms > 0, norms, 1.0)[:, :, None]
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    ok = s[:, -1] > dep_tol * np.maximum(s[:, 0], 1e-300)
    ok &= np.all(norms > 0, axis=1)
    return vt[:, -1, :], ok


def _side_masses(rows, rownorm, weights, U, on_tol):
    S = U @ rows.T                          # (B, N)
    on = np.abs(S) <= on_tol * rownorm[None, :]
    pos = ((S > 0) & ~on) @ weights
    neg = ((S < 0) & ~on) @ weights
    return pos, neg, on


def depth_scan(rows, weights, z_mass, on_tol, dep_tol, lo, hi):
    """Minimum open-side mass over hyperplanes spanned by (r-1)-subsets of rows.

    Returns ``(best, subset, sign, normal, degenerate)`` where ``degenerate``
    is an array with rows ``[normal..., pos, neg]`` for hyperplanes carrying
    more on-plane rows than the spanning subset.
    """
    rows = np.ascontiguousarray(rows, dtype=float)
    weights = np.ascontiguousarray(weights, dtype=float)
    N, r = rows.shape
    k = r - 1
    rownorm = np.linalg.norm(rows, axis=1)
    best = np.inf
    best_subset = np.full(k, -1, dtype=np.int64)
    best_sign = 0
    best_normal = np.zeros(r)
    degenerate = []
    for subsets in _subset_batches(N, k, lo, hi):
        U, ok = _normals(rows, subsets, dep_tol)
        if not ok.any():
            continue
        subsets, U = subsets[ok], U[ok]
        pos, neg, on = _side_masses(rows, rownorm, weights, U, on_tol)
        non = on.sum(axis=1)
        nondeg = non == k
        # candidates in sequential order (subset-major, + before -), so that
        # ties resolve exactly as in the compiled kernel
        vals = np.where(nondeg[:, None], np.stack([pos, neg], axis=1) + z_mass, np.inf).ravel()
        for flat in np.flatnonzero(vals < best - IMPROVE_TOL):
            if vals[flat] < best - IMPROVE_TOL:
                i, side = divmod(int(flat), 2)
                best = float(vals[flat])
                best_subset = subsets[i].copy()
                best_sign = 1 if side == 0 else -1
                best_normal = U[i].copy()
        if (~nondeg).any():
            idx = np.flatnonzero(~nondeg)
            degenerate.append(np.hstack([U[idx], pos[idx, None], neg[idx, None]]))
    if degenerate:
        deg = np.vstack(degenerate)
        # only hyperplanes that might still beat the final value are of interest
        keep = np.minimum(deg[:, -2], deg[:, -1]) + z_mass < best - IMPROVE_TOL
        deg = deg[keep]
    else:
        deg = np.zeros((0, r + 2))
    return best, best_subset, best_sign, best_normal, deg


def constraint_scan(rows, weights, threshold, on_tol, dep_tol, lo, hi):
    """Oriented unit normals ``u`` whose closed side ``{u . row >= 0}`` has mass > threshold."""
    rows = np.ascontiguousarray(rows, dtype=float)
    weights = np.ascontiguousarray(weights, dtype=float)
    N, r = rows.shape
    k = r - 1
    rownorm = np.linalg.norm(rows, axis=1)
    out = []
    for subsets in _subset_batches(N, k, lo, hi):
        U, ok = _normals(rows, subsets, dep_tol)
        U = U[ok]
        if U.shape[0] == 0:
            continue
        pos, neg, on = _side_masses(rows, rownorm, weights, U, on_tol)
        onm = on @ weights
        plus = pos + onm > threshold
        minus = neg + onm > threshold
        # keep the sequential order: +u then -u for each subset
        for i in np.flatnonzero(plus | minus):
            if plus[i]:
                out.append(U[i])
            if minus[i]:
                out.append(-U[i])
    if out:
        return np.vstack(out)
    return np.zeros((0, r))


def jacobi_eigh(A, max_sweeps, tol):
    """Cyclic Jacobi eigenvalue iteration on a symmetric matrix.

    Returns ``(eigenvalues, eigenvectors, sweeps, converged)``; eigenpairs are
    unsorted.
    """
    a = np.array(A, dtype=float, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(np.linalg.norm(a), 1e-300)
    sweeps = 0
    converged = False
    offdiag = ~np.eye(n, dtype=bool)
    for sweeps in range(1, max_sweeps + 1):
        off = np.linalg.norm(a[offdiag])
        if off <= tol * scale:
            converged = True
            sweeps -= 1
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        off = np.linalg.norm(a[offdiag])
        converged = off <= tol * scale
    return np.diag(a).copy(), v, sweeps, converged
