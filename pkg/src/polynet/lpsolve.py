"""Small dense linear programs: ``min c.x  s.t.  A x <= b,  E x = e`` with free ``x``.

The solver is a two-phase tableau simplex with Bland's rule, generic over the
entry type so that the same code runs in float64 and, as a fallback, in exact
rational arithmetic (``fractions.Fraction`` in object arrays).

The LPs arising here have few variables (a lifted dimension, at most ~100) and
possibly many inequalities, so the simplex runs on the dual,

    min  g.w   s.t.  G w = h,  w >= 0,
    G = [A^T | E^T | -E^T],  g = [b; e; -e],  h = -c,

whose tableau has one row per primal variable.  The primal solution is the
vector of simplex multipliers of the dual's equality rows.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, LPIterationError

DEFAULT_TOL = 1e-9
OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

EXACT_MAX_VARS = 30
EXACT_MAX_CONSTRAINTS = 500
CHEBYSHEV_CAP = 1e6
REFACTOR_EVERY = 50


def _as_block(rows, num_vars: int):
    if rows is None:
        return np.zeros((0, num_vars)), np.zeros(0)
    if isinstance(rows, tuple) and len(rows) == 2 and not np.isscalar(rows[1]):
        A, b = rows
        A = np.asarray(A, dtype=float).reshape(-1, num_vars)
        b = np.asarray(b, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise DimensionError("constraint matrix and bound vector disagree in length")
        return A, b
    rows = list(rows)
    if not rows:
        return np.zeros((0, num_vars)), np.zeros(0)
    A = np.array([np.asarray(a, dtype=float).reshape(-1) for a, _ in rows])
    b = np.array([float(bb) for _, bb in rows])
    if A.shape[1] != num_vars:
        raise DimensionError(f"constraint rows must have length {num_vars}")
    return A, b


@dataclass(frozen=True)
class LinearProgram:
    """``min objective.x`` subject to ``A_ub x <= b_ub`` and ``A_eq x = b_eq``.

    ``ineqs``/``eqs`` may be given either as a list of ``(row, bound)`` pairs
    or as an ``(A, b)`` tuple of arrays.
    """

    objective: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray

    def __init__(self, objective, ineqs=None, eqs=None, num_vars: Optional[int] = None):
        c = np.asarray(objective, dtype=float).reshape(-1)
        n = c.shape[0] if num_vars is None else int(num_vars)
        if c.shape[0] != n:
            raise DimensionError(f"objective has length {c.shape[0]}, expected {n}")
        if n < 1:
            raise DimensionError("a linear program needs at least one variable")
        A, b = _as_block(ineqs, n)
        E, e = _as_block(eqs, n)
        for arr in (c, A, b, E, e):
            if not np.all(np.isfinite(arr)):
                raise ValueError("LP data must be finite")
            arr.setflags(write=False)
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "A_ub", A)
        object.__setattr__(self, "b_ub", b)
        object.__setattr__(self, "A_eq", E)
        object.__setattr__(self, "b_eq", e)

    @property
    def num_vars(self) -> int:
        return self.objective.shape[0]

    @property
    def num_constraints(self) -> int:
        return self.A_ub.shape[0] + self.A_eq.shape[0]


@dataclass(frozen=True)
class LPResult:
    status: str
    x: Optional[np.ndarray] = None
    value: Optional[float] = None
    exact: bool = False
    iterations: int = 0
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


# --------------------------------------------------------------------------
# tableau simplex


class _Simplex:
    """Two-phase simplex on ``min g.w, G w = h, w >= 0`` (Dantzig pricing, Bland on stalls)."""

    def __init__(self, G, g, h, exact: bool, max_iter: int):
        self.exact = exact
        m, K = G.shape
        self.m, self.K = m, K
        if exact:
            zero, one = Fraction(0), Fraction(1)
            T = np.empty((m + 1, K + m + 1), dtype=object)
            T[...] = zero
            self.piv_tol = zero
            self.cost_tol = zero
        else:
            one = 1.0
            T = np.zeros((m + 1, K + m + 1))
            self.piv_tol = 1e-11
            # a reduced cost is the (negated) violation of one primal row, so
            # the tolerance follows that row's bound
            self.cost_tol = 1e-11 * (1.0 + np.abs(np.asarray(g, dtype=float)))
        sign = np.ones(m, dtype=int)
        for i in range(m):
            if h[i] < 0:
                sign[i] = -1
        T[:m, :K] = G * sign[:, None]
        for i in range(m):
            T[i, K + i] = one
        T[:m, -1] = h * sign
        self.T = T
        self.T0 = None if exact else T[:m].copy()
        self.sign = sign
        self.g = g
        self.basis = list(range(K, K + m))
        self.cost = None
        self.iterations = 0
        self.max_iter = max_iter

    def _pivot(self, r: int, c: int):
        T = self.T
        T[r, :] = T[r, :] / T[r, c]
        col = T[:, c].copy()
        col[r] = 0
        nz = np.flatnonzero(col != 0)
        if nz.size:
            T[nz, :] -= np.outer(col[nz], T[r, :])
        if not self.exact:
            T[:, c] = 0.0
            T[r, c] = 1.0
        self.basis[r] = c
        if not self.exact and self.iterations % REFACTOR_EVERY == 0:
            self._refactor()

    def _set_cost(self, cost):
        """Install a cost vector over all K + m columns and rebuild the objective row."""
        T, m = self.T, self.m
        self.cost = cost
        cB = np.array([cost[j] for j in self.basis], dtype=T.dtype)
        T[m, :] = 0
        T[m, :-1] = cost
        T[m, :] -= cB @ T[:m, :]

    def _refactor(self):
        """Recompute the tableau from the original rows and the current basis."""
        T, m = self.T, self.m
        Bm = self.T0[:, self.basis]
        try:
            T[:m] = np.linalg.solve(Bm, self.T0)
        except np.linalg.LinAlgError:
            return
        # snap basic columns to exact unit vectors
        for i, j in enumerate(self.basis):
            T[:m, j] = 0.0
            T[i, j] = 1.0
        if self.cost is not None:
            self._set_cost(self.cost)

    def _run(self) -> str:
        """Pivot to optimality.

        Dantzig pricing (most negative reduced cost) while the objective keeps
        moving; after ``stall_limit`` consecutive degenerate pivots the phase
        switches to Bland's rule for good, which rules out cycling.
        """
        T, m, K = self.T, self.m, self.K
        bland = False
        stall = 0
        stall_limit = 2 * m + 20
        last = T[m, -1]
        while True:
            d = T[m, :K]
            cand = np.flatnonzero(d < -self.cost_tol)
            if cand.size == 0:
                return OPTIMAL
            if bland:
                c = int(cand[0])
            else:
                c = int(cand[np.argmin(d[cand])])
            col = T[:m, c]
            rows = np.flatnonzero(col > self.piv_tol)
            if rows.size == 0:
                return UNBOUNDED
            ratios = T[rows, -1] / col[rows]
            best = ratios.min()
            if self.exact:
                ties = rows[ratios == best]
            else:
                ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            if bland:
                r = int(min(ties, key=lambda i: self.basis[i]))
            else:
                # largest pivot among the tied rows, for stability
                r = int(ties[np.argmax(np.abs(col[ties]))])
            self.iterations += 1
            if self.iterations > self.max_iter:
                raise LPIterationError(f"simplex exceeded {self.max_iter} iterations")
            self._pivot(r, c)
            if not bland:
                moved = T[m, -1] != last if self.exact else abs(T[m, -1] - last) > 1e-12 * max(1.0, abs(last))
                stall = 0 if moved else stall + 1
                last = T[m, -1]
                if stall >= stall_limit:
                    bland = True

    def solve(self):
        T, m, K = self.T, self.m, self.K
        zero = T.dtype.type(0) if not self.exact else Fraction(0)
        # phase 1: minimize the sum of artificials
        cost1 = np.array([zero] * K + [zero + 1] * m, dtype=T.dtype)
        self._set_cost(cost1)
        self._run()
        if not self.exact:
            self._refactor()
        infeas = -T[m, -1]
        hscale = 1.0 if self.exact else max(1.0, float(np.abs(self.T0[:, -1]).sum()))
        if infeas > (0 if self.exact else 1e-9 * hscale):
            return INFEASIBLE
        # drive remaining artificials out of the basis where possible
        for i in range(m):
            if self.basis[i] >= K:
                row = T[i, :K]
                if self.exact:
                    nz = np.flatnonzero(row != 0)
                else:
                    nz = np.flatnonzero(np.abs(row) > 1e-9)
                if nz.size:
                    j = int(nz[np.argmax(np.abs(row[nz]))]) if not self.exact else int(nz[0])
                    self._pivot(i, j)
        # phase 2
        cost2 = np.concatenate([np.asarray(self.g, dtype=T.dtype),
                                np.array([zero] * m, dtype=T.dtype)])
        self._set_cost(cost2)
        status = self._run()
        if not self.exact:
            self._refactor()
        return status

    def value(self):
        return -self.T[self.m, -1]

    def multipliers(self):
        """Simplex multipliers ``pi = c_B B^{-1}`` in the original row signs."""
        T, m, K = self.T, self.m, self.K
        cB = np.array([self.cost[j] for j in self.basis], dtype=T.dtype)
        if not self.exact:
            try:
                pi = np.linalg.solve(self.T0[:, self.basis].T, cB)
                return pi * self.sign
            except np.linalg.LinAlgError:
                pass
        Binv = T[:m, K:K + m]
        pi = cB @ Binv
        return pi * self.sign


def _normalize(A, b, tol):
    """Scale rows to unit length; drop zero rows (returns False if one is violated)."""
    norms = np.linalg.norm(A, axis=1) if A.shape[0] else np.zeros(0)
    zero = norms <= 1e-300
    ok = True
    if zero.any():
        ok = bool(np.all(b[zero] >= -tol))
    A = A[~zero] / norms[~zero, None]
    b = b[~zero] / norms[~zero]
    return A, b, ok


def _dual_solve(c, A, b, E, e, exact: bool, max_iter: int):
    n = c.shape[0]
    G = np.hstack([A.T, E.T, -E.T]) if (A.size or E.size) else np.zeros((n, 0))
    g = np.concatenate([b, e, -e])
    h = -c
    if exact:
        G = _to_fraction(G)
        g = _to_fraction(g)
        h = _to_fraction(h)
    sx = _Simplex(G, g, h, exact, max_iter)
    status = sx.solve()
    return status, sx


def _to_fraction(arr):
    out = np.empty(arr.shape, dtype=object)
    flat = out.reshape(-1)
    for i, v in enumerate(np.asarray(arr, dtype=float).reshape(-1)):
        flat[i] = Fraction(float(v))
    return out


def _max_iter(rows: int, cols: int) -> int:
    return max(5000, 50 * (rows + cols))


def _solve_core(c, A, b, E, e, exact: bool, tol: float):
    """Return (status, x, iterations)."""
    n = c.shape[0]
    if A.shape[0] == 0 and E.shape[0] == 0:
        if np.all(c == 0):
            return OPTIMAL, np.zeros(n, dtype=object if exact else float), 0
        return UNBOUNDED, None, 0
    max_iter = _max_iter(n, A.shape[0] + 2 * E.shape[0])
    status, sx = _dual_solve(c, A, b, E, e, exact, max_iter)
    iters = sx.iterations
    if status == OPTIMAL:
        return OPTIMAL, sx.multipliers(), iters
    if status == UNBOUNDED:
        # dual unbounded: primal infeasible
        return INFEASIBLE, None, iters
    # dual infeasible: primal is infeasible or unbounded; decide by feasibility
    # of  A x - t <= b,  -t <= 0,  E x = e  (minimize t)
    ca = np.zeros(n + 1)
    ca[-1] = 1.0
    Aa = np.zeros((A.shape[0] + 1, n + 1))
    Aa[:-1, :n] = A
    Aa[:-1, n] = -1.0
    Aa[-1, n] = -1.0
    ba = np.concatenate([b, [0.0]])
    Ea = np.hstack([E, np.zeros((E.shape[0], 1))])
    st2, sx2 = _dual_solve(ca, Aa, ba, Ea, e, exact, _max_iter(n + 1, Aa.shape[0] + 2 * E.shape[0]))
    iters += sx2.iterations
    if st2 != OPTIMAL:
        # the auxiliary problem is bounded below, so this means E x = e is infeasible
        return INFEASIBLE, None, iters
    t = sx2.multipliers()[-1]
    if (t > 0) if exact else (t > tol):
        return INFEASIBLE, None, iters
    return UNBOUNDED, None, iters


def _check(lp: LinearProgram, x, tol: float) -> bool:
    ok = True
    if lp.A_ub.shape[0]:
        ok &= bool(np.all(lp.A_ub @ x <= lp.b_ub + tol * (1 + np.abs(lp.b_ub))))
    if lp.A_eq.shape[0]:
        ok &= bool(np.all(np.abs(lp.A_eq @ x - lp.b_eq) <= tol * (1 + np.abs(lp.b_eq))))
    return ok


def lp_solve(lp: LinearProgram, tol: float = DEFAULT_TOL, exact: bool = False) -> LPResult:
    """Solve ``lp``; deterministic for a fixed input.

    Floating point first; on an iteration-cap overrun or a failed constraint
    re-check, small problems are re-solved in exact rational arithmetic and
    larger ones raise :class:`LPIterationError`.
    """
    c = np.asarray(lp.objective, dtype=float)
    A, b, ok1 = _normalize(np.asarray(lp.A_ub), np.asarray(lp.b_ub), tol)
    E, e, ok2 = _normalize(np.asarray(lp.A_eq), np.asarray(lp.b_eq), tol)
    if not ok1:
        return LPResult(INFEASIBLE)
    if not ok2:
        zero_rows = np.linalg.norm(lp.A_eq, axis=1) <= 1e-300
        if np.any(np.abs(lp.b_eq[zero_rows]) > tol):
            return LPResult(INFEASIBLE)
    small = lp.num_vars <= EXACT_MAX_VARS and lp.num_constraints <= EXACT_MAX_CONSTRAINTS
    reason = None
    if not exact:
        try:
            status, x, iters = _solve_core(c, A, b, E, e, False, tol)
            if status != OPTIMAL:
                return LPResult(status, iterations=iters)
            x = np.asarray(x, dtype=float)
            if _check(lp, x, tol):
                return LPResult(OPTIMAL, x, float(c @ x), False, iters)
            reason = "constraint re-check failed"
        except LPIterationError as err:
            reason = str(err)
        if not small:
            raise LPIterationError(f"{reason}; problem too large for the exact fallback")
    status, x, iters = _solve_core(c, A, b, E, e, True, 0.0)
    if status != OPTIMAL:
        return LPResult(status, exact=True, iterations=iters, extra={"fallback": reason})
    xe = np.array(x, dtype=object)
    value = sum((Fraction(float(ci)) * xi for ci, xi in zip(c, xe)), Fraction(0))
    return LPResult(OPTIMAL, np.array([float(v) for v in xe]), float(value), True, iters,
                    extra={"fallback": reason, "x_exact": list(xe)})


def lp_feasible_point(ineqs=None, eqs=None, tol: float = DEFAULT_TOL,
                      num_vars: Optional[int] = None, cap: float = CHEBYSHEV_CAP):
    """A point of ``{A x <= b, E x = e}`` maximizing the minimum slack, or ``None``.

    The slack of row ``i`` is measured as a distance, ``(b_i - a_i.x)/|a_i|``,
    so for a full-dimensional polytope the result is a Chebyshev center.  The
    slack variable is capped at ``cap`` so unbounded regions still give a
    finite point.  With no constraints at all the origin is returned.
    """
    if num_vars is None:
        for blk in (ineqs, eqs):
            if blk is None:
                continue
            if isinstance(blk, tuple) and len(blk) == 2 and not np.isscalar(blk[1]):
                num_vars = np.asarray(blk[0]).reshape(len(np.atleast_1d(blk[1])), -1).shape[1]
                break
            blk = list(blk)
            if blk:
                num_vars = len(np.asarray(blk[0][0]).reshape(-1))
                break
    if num_vars is None:
        raise ValueError("num_vars is required when no constraint rows are given")
    A, b = _as_block(ineqs, num_vars)
    E, e = _as_block(eqs, num_vars)
    if A.shape[0] == 0 and E.shape[0] == 0:
        return np.zeros(num_vars)
    n = num_vars
    norms = np.linalg.norm(A, axis=1)
    Aa = np.zeros((A.shape[0] + 1, n + 1))
    Aa[:-1, :n] = A
    Aa[:-1, n] = norms
    Aa[-1, n] = 1.0
    ba = np.concatenate([b, [cap]])
    Ea = np.hstack([E, np.zeros((E.shape[0], 1))])
    obj = np.zeros(n + 1)
    obj[-1] = -1.0
    res = lp_solve(LinearProgram(obj, (Aa, ba), (Ea, e)), tol)
    if res.status != OPTIMAL:
        return None
    t = res.x[-1]
    if t < -tol:
        return None
    return res.x[:n]


def chebyshev_slack(A, b, x) -> float:
    """Minimum normalized slack of ``x`` in ``A x <= b``."""
    A = np.asarray(A, dtype=float)
    if A.shape[0] == 0:
        return float("inf")
    norms = np.linalg.norm(A, axis=1)
    return float(np.min((np.asarray(b) - A @ x) / np.where(norms > 0, norms, 1.0)))
