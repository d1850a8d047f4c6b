# Copyright (c) 2026 gkw-solver developers
#
# Licensed under the MIT License. See the LICENSE file for details.

"""
Dense two-phase tableau simplex for small standard-form linear programs,

    minimize c^T x  subject to  A x = b,  x >= 0,

with Bland's rule for both the entering and the leaving variable, so pivoting is
deterministic and cannot cycle. The dual vector is recovered from the final basis.
"""

from dataclasses import dataclass
from typing import List, Literal, Optional

import numpy as np
from numpy.typing import NDArray

from gkw_solver.utils.logger import logger

FloatArray = NDArray[np.float64]

LPStatus = Literal["optimal", "infeasible", "unbounded", "iteration_limit"]


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    x: Optional[FloatArray]
    objective: Optional[float]
    dual: Optional[FloatArray]
    basis: List[int]
    iterations: int


class _Tableau:
    """
    Constraint rows followed by one reduced-cost row; the last column holds the right-hand side.
    """

    def __init__(self, table: FloatArray, basis: List[int], tol: float) -> None:
        self.table = table
        self.basis = basis
        self.tol = tol
        self.iterations = 0

    @property
    def rows(self) -> int:
        return self.table.shape[0] - 1

    def pivot(self, row: int, col: int) -> None:
        t = self.table
        t[row] /= t[row, col]
        for other in range(t.shape[0]):
            if other != row and t[other, col] != 0.0:
                t[other] -= t[other, col] * t[row]
        self.basis[row] = col
        self.iterations += 1

    def entering(self, allowed: int) -> Optional[int]:
        costs = self.table[-1, :allowed]
        for col in range(allowed):
            if costs[col] < -self.tol:
                return col
        return None

    def leaving(self, col: int) -> Optional[int]:
        best_row: Optional[int] = None
        best_ratio = np.inf
        for row in range(self.rows):
            coef = self.table[row, col]
            if coef <= self.tol:
                continue
            ratio = self.table[row, -1] / coef
            if best_row is None or ratio < best_ratio - self.tol:
                best_row, best_ratio = row, ratio
            elif abs(ratio - best_ratio) <= self.tol and self.basis[row] < self.basis[best_row]:
                best_row = row
        return best_row

    def run(self, allowed: int, max_iter: int) -> LPStatus:
        while self.iterations < max_iter:
            col = self.entering(allowed)
            if col is None:
                return "optimal"
            row = self.leaving(col)
            if row is None:
                return "unbounded"
            logger.trace(f"Simplex pivot: row {row}, column {col}")
            self.pivot(row, col)
        return "iteration_limit"


def solve_standard_form(
    c: FloatArray,
    A: FloatArray,
    b: FloatArray,
    tol: float = 1e-11,
    max_iter: Optional[int] = None,
) -> LPResult:
    """
    Solves min c^T x subject to A x = b, x >= 0.

    Returns the primal point, the objective, and a dual vector y with A^T y <= c
    (up to tolerance) when the problem is optimal.
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64).copy()
    c = np.asarray(c, dtype=np.float64)
    m, n = A.shape
    limit = max_iter if max_iter is not None else 50 * (m + n + 1)

    signs = np.where(b < 0.0, -1.0, 1.0)
    A_pos = A * signs[:, np.newaxis]
    b_pos = b * signs

    # Phase 1: artificial identity basis, minimize the sum of artificials.
    table = np.zeros((m + 1, n + m + 1))
    table[:m, :n] = A_pos
    table[:m, n : n + m] = np.eye(m)
    table[:m, -1] = b_pos
    table[-1, :n] = -A_pos.sum(axis=0)
    table[-1, -1] = -b_pos.sum()
    tableau = _Tableau(table, list(range(n, n + m)), tol)

    status = tableau.run(n + m, limit)
    if status != "optimal":
        logger.warning(f"Simplex phase 1 stopped with status {status}")
        return LPResult(status, None, None, None, list(tableau.basis), tableau.iterations)
    infeasibility = -tableau.table[-1, -1]
    if infeasibility > tol * (1.0 + float(np.max(np.abs(b_pos), initial=0.0))) * 10.0:
        logger.debug(f"Simplex phase 1 infeasibility {infeasibility:.3e}")
        return LPResult("infeasible", None, None, None, list(tableau.basis), tableau.iterations)

    # Drive artificial variables out of the basis; rows where that is impossible are redundant.
    keep: List[int] = []
    for row in range(m):
        if tableau.basis[row] >= n:
            candidates = [col for col in range(n) if abs(tableau.table[row, col]) > tol]
            if not candidates:
                logger.debug(f"Simplex dropping redundant constraint row {row}")
                continue
            tableau.pivot(row, candidates[0])
        keep.append(row)

    # Phase 2 on the original columns.
    rows = tableau.table[keep]
    basis = [tableau.basis[row] for row in keep]
    table2 = np.zeros((len(keep) + 1, n + 1))
    table2[:-1, :n] = rows[:, :n]
    table2[:-1, -1] = rows[:, -1]
    cost_basis = c[basis] if basis else np.zeros(0)
    table2[-1, :n] = c - cost_basis @ table2[:-1, :n]
    table2[-1, -1] = -float(cost_basis @ table2[:-1, -1])
    phase2 = _Tableau(table2, basis, tol)
    phase2.iterations = tableau.iterations
    status = phase2.run(n, limit)
    if status != "optimal":
        logger.warning(f"Simplex phase 2 stopped with status {status}")
        return LPResult(status, None, None, None, list(phase2.basis), phase2.iterations)

    x = np.zeros(n)
    for row, col in enumerate(phase2.basis):
        x[col] = max(phase2.table[row, -1], 0.0)
    objective = float(c @ x)

    basis_matrix = A[:, phase2.basis]
    if basis_matrix.shape[1] > 0:
        dual, *_ = np.linalg.lstsq(basis_matrix.T, c[phase2.basis], rcond=None)
    else:
        dual = np.zeros(m)
    logger.debug(f"Simplex optimal after {phase2.iterations} pivots, objective {objective:.6e}")
    return LPResult("optimal", x, objective, dual, list(phase2.basis), phase2.iterations)
