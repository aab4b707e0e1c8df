"""Dense tableau simplex with Bland's anti-cycling rule.

Solves min c.x subject to A x = b, x >= 0 in two phases. Phase 1 adds one
artificial column per row; phase 2 continues from the phase-1 basis with the
artificials barred from entering. Entering columns are priced by the most
negative reduced cost; after DEGENERATE_LIMIT consecutive pivots that leave
the objective unchanged the solve switches to Bland's smallest-index rule for
good, which rules out cycling. Pivoting is deterministic: identical inputs
produce bit-identical tableaus.
"""
import logging
from typing import List, Optional

import numpy as np

from bellcheck.errors import SimplexError

logger = logging.getLogger("bellcheck.lp")

PIVOT_EPS = 1e-12
DEGENERATE_LIMIT = 50


class DenseSimplex:
    def __init__(self, A: np.ndarray, b: np.ndarray, eps: float = PIVOT_EPS, max_iter: Optional[int] = None):
        A = np.asarray(A, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise ValueError(f"incompatible shapes A{A.shape}, b{b.shape}")
        self.m, self.n = A.shape
        self.A = A
        self.eps = eps
        self.max_iter = max_iter or 50 * (self.m + self.n)
        # Flip rows so the right-hand side is non-negative.
        self.row_sign = np.where(b < 0, -1.0, 1.0)
        self.T = np.hstack([A * self.row_sign[:, None], np.eye(self.m)])
        self.rhs = b * self.row_sign
        self.basis: List[int] = list(range(self.n, self.n + self.m))
        self.iterations = 0

    def _pivot(self, i: int, j: int) -> None:
        piv = self.T[i, j]
        self.T[i] /= piv
        self.rhs[i] /= piv
        f = self.T[:, j].copy()
        f[i] = 0.0
        self.T -= np.outer(f, self.T[i])
        self.rhs -= f * self.rhs[i]
        self.basis[i] = j
        self.iterations += 1

    def _optimize(self, cost: np.ndarray, allowed: int) -> None:
        """Most negative reduced cost on columns [0, allowed); Bland's rule once degenerate pivots pile up."""
        bland = False
        degenerate = 0
        while True:
            if self.iterations > self.max_iter:
                raise SimplexError(f"no convergence after {self.iterations} pivots")
            reduced = cost[:allowed] - cost[self.basis] @ self.T[:, :allowed]
            entering = np.flatnonzero(reduced < -self.eps)
            if entering.size == 0:
                return
            # argmin returns the first index among equal minima
            j = int(entering[0]) if bland else int(np.argmin(reduced))
            col = self.T[:, j]
            rows = np.flatnonzero(col > self.eps)
            if rows.size == 0:
                raise SimplexError(f"objective unbounded along column {j}")
            ratios = self.rhs[rows] / col[rows]
            best = ratios.min()
            # smallest basic variable index among tied rows
            tied = rows[ratios <= best + self.eps * max(1.0, abs(best))]
            i = int(min(tied, key=lambda r: self.basis[r]))
            degenerate = degenerate + 1 if best <= self.eps else 0
            if not bland and degenerate >= DEGENERATE_LIMIT:
                logger.debug("%d degenerate pivots in a row; switching to Bland's rule", degenerate)
                bland = True
            self._pivot(i, j)

    def phase_one(self) -> float:
        """Minimize the sum of artificials; returns the optimal artificial objective."""
        cost = np.concatenate([np.zeros(self.n), np.ones(self.m)])
        self._optimize(cost, self.n + self.m)
        objective = float(sum(self.rhs[i] for i, v in enumerate(self.basis) if v >= self.n))
        self._drive_out_artificials()
        logger.debug("phase 1: %d rows, %d columns, objective %.3e after %d pivots",
                     self.m, self.n, objective, self.iterations)
        return objective

    def _drive_out_artificials(self) -> None:
        # Only zero-level artificials; a positive one means the system is infeasible.
        for i, v in enumerate(self.basis):
            if v < self.n or self.rhs[i] > 1e-9:
                continue
            candidates = np.flatnonzero(np.abs(self.T[i, :self.n]) > self.eps)
            if candidates.size:
                self._pivot(i, int(candidates[0]))

    def phase_two(self, c: np.ndarray) -> float:
        """Minimize c.x from the phase-1 basis; call phase_one first."""
        cost = np.concatenate([np.asarray(c, dtype=np.float64), np.zeros(self.m)])
        self._optimize(cost, self.n)
        return float(self.solution() @ c)

    def solution(self) -> np.ndarray:
        x = np.zeros(self.n)
        for i, v in enumerate(self.basis):
            if v < self.n:
                x[v] = self.rhs[i]
        return x

    def duals(self, c: np.ndarray) -> np.ndarray:
        """y with A^T y <= c at optimality and y.b equal to the optimum, in the caller's row signs."""
        if any(v >= self.n for v in self.basis):
            raise SimplexError("artificial variable left in the basis; duals are undefined")
        c = np.asarray(c, dtype=np.float64)
        basis_matrix = self.A[:, self.basis]
        try:
            return np.linalg.solve(basis_matrix.T, c[self.basis])
        except np.linalg.LinAlgError as e:
            raise SimplexError(f"singular final basis: {e}") from None
