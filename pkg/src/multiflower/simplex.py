"""Dense two-phase tableau simplex for small LPs.

Solves ``max c @ x  s.t.  A @ x <= b, x >= 0``.  Pricing is Dantzig's
largest-coefficient rule; after ``bland_after`` degenerate pivots the solver
switches to Bland's smallest-index rule for the rest of the run, which
rules out cycling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ITERATION_LIMIT = "iteration-limit"
UNBOUNDED = "unbounded"

PIVOT_TOL = 1e-9
COST_TOL = 1e-10


@dataclass
class SimplexResult:
    status: str
    x: np.ndarray
    value: float
    pivots: int
    degenerate: int


class _Tableau:
    def __init__(self, T: np.ndarray, basis: np.ndarray, max_iter: int, bland_after: int):
        self.T = T
        self.basis = basis
        self.max_iter = max_iter
        self.bland_after = bland_after
        self.pivots = 0
        self.degenerate = 0

    def pivot(self, r: int, j: int):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.basis[r] = j
        self.pivots += 1

    def run(self, ncols: int) -> str:
        """Optimize the objective held in the last row over the first ``ncols`` columns."""
        T = self.T
        m = T.shape[0] - 1
        while True:
            if self.pivots >= self.max_iter:
                return ITERATION_LIMIT
            obj = T[m, :ncols]
            if self.degenerate >= self.bland_after:
                cand = np.flatnonzero(obj < -COST_TOL)
                if cand.size == 0:
                    return OPTIMAL
                j = int(cand[0])
            else:
                j = int(np.argmin(obj))
                if obj[j] >= -COST_TOL:
                    return OPTIMAL
            colj = T[:m, j]
            rows = np.flatnonzero(colj > PIVOT_TOL)
            if rows.size == 0:
                return UNBOUNDED
            ratios = T[rows, -1] / colj[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12]
            r = int(ties[np.argmin(self.basis[ties])])
            if T[r, -1] <= PIVOT_TOL:
                self.degenerate += 1
            self.pivot(r, j)


def simplex_max(
    c: np.ndarray, A: np.ndarray, b: np.ndarray, max_iter: int = 100_000, bland_after: int = 1000
) -> SimplexResult:
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, c.size)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    ncols = n + m
    neg = np.flatnonzero(b < 0)
    na = neg.size
    width = n + m + na
    T = np.zeros((m + 1, width + 1))
    T[:m, :n] = A
    T[np.arange(m), n + np.arange(m)] = 1.0
    T[:m, -1] = b
    basis = n + np.arange(m)
    if na:
        T[neg] *= -1.0
        T[neg, n + m + np.arange(na)] = 1.0
        basis[neg] = n + m + np.arange(na)
        # phase 1: maximize -sum(artificials), row expressed in nonbasic terms
        T[m] = 0.0
        T[m, :] = -T[neg].sum(axis=0)
        T[m, n + m :width] = 0.0
        tab = _Tableau(T, basis, max_iter, bland_after)
        status = tab.run(width)
        if status == ITERATION_LIMIT:
            return SimplexResult(status, np.zeros(n), float("nan"), tab.pivots, tab.degenerate)
        if -T[m, -1] > 1e-9 * max(1.0, np.abs(b).max()):
            return SimplexResult(INFEASIBLE, np.zeros(n), float("nan"), tab.pivots, tab.degenerate)
        keep = np.ones(m, dtype=bool)
        for r in range(m):
            if basis[r] >= n + m:
                nz = np.flatnonzero(np.abs(T[r, : n + m]) > PIVOT_TOL)
                if nz.size:
                    tab.pivot(r, int(nz[0]))
                else:
                    keep[r] = False
        rows = np.append(np.flatnonzero(keep), m)
        T = np.delete(T[rows], np.s_[n + m : width], axis=1)
        basis = basis[keep]
        m = basis.size
        pivots, degenerate = tab.pivots, tab.degenerate
    else:
        pivots = degenerate = 0
    T[m] = 0.0
    T[m, :n] = -c
    # eliminate basic columns from the objective row
    for r, j in enumerate(basis):
        if T[m, j] != 0.0:
            T[m] -= T[m, j] * T[r]
    tab = _Tableau(T, basis, max_iter, bland_after)
    tab.pivots, tab.degenerate = pivots, degenerate
    status = tab.run(ncols)
    x = np.zeros(ncols)
    x[basis] = T[:m, -1]
    x = x[:n]
    return SimplexResult(status, x, float(c @ x), tab.pivots, tab.degenerate)
