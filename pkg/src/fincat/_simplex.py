"""Dense two-phase simplex for small equality-form linear programs.

Solves ``min c @ x  s.t.  A @ x == b, x >= 0``. Bland's rule keeps it from
cycling; problems here have at most a few hundred columns and < 10 rows.
"""

from __future__ import annotations

import numpy as np

PIVOT_TOL = 1e-12


class LPError(RuntimeError):
    pass


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r] -= T[r, col] * T[row]


def _run(T: np.ndarray, basis: list[int], n_cols: int, max_iter: int) -> None:
    """Minimize the objective stored in the last row of tableau ``T``."""
    for _ in range(max_iter):
        reduced = T[-1, :n_cols]
        entering = next((j for j in range(n_cols) if reduced[j] < -PIVOT_TOL), None)
        if entering is None:
            return
        col = T[:-1, entering]
        ratios = np.full(col.shape, np.inf)
        pos = col > PIVOT_TOL
        ratios[pos] = T[:-1, -1][pos] / col[pos]
        if not np.any(pos):
            raise LPError("linear program is unbounded")
        best = ratios.min()
        # Bland: among tied rows leave via the smallest basic index
        ties = [r for r in np.flatnonzero(ratios <= best + PIVOT_TOL)]
        leave = min(ties, key=lambda r: basis[r])
        _pivot(T, leave, entering)
        basis[leave] = entering
    raise LPError("simplex iteration limit reached")


def solve(c, A_eq, b_eq, max_iter: int = 10_000) -> tuple[np.ndarray, float]:
    c = np.asarray(c, dtype=float)
    A = np.array(A_eq, dtype=float)
    b = np.array(b_eq, dtype=float)
    m, n = A.shape
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # phase one: artificial basis, minimize the sum of artificials
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    _run(T, basis, n + m, max_iter)
    if -T[-1, -1] > 1e-9:
        raise LPError("linear program is infeasible")

    # drive leftover artificials out of the basis where possible
    for r, var in enumerate(basis):
        if var >= n:
            cols = [j for j in range(n) if abs(T[r, j]) > PIVOT_TOL]
            if cols:
                _pivot(T, r, cols[0])
                basis[r] = cols[0]

    # phase two on the original columns
    T2 = np.zeros((m + 1, n + 1))
    T2[:m, :n] = T[:m, :n]
    T2[:m, -1] = T[:m, -1]
    T2[-1, :n] = c
    for r, var in enumerate(basis):
        if var < n:
            T2[-1] -= c[var] * T2[r]
    _run(T2, basis, n, max_iter)

    x = np.zeros(n)
    for r, var in enumerate(basis):
        if var < n:
            x[var] = T2[r, -1]
    return x, float(c @ x)
