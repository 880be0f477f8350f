"""Dense two-phase tableau simplex with Bland's rule.

Solves ``min c @ x  s.t.  A x = b, x >= 0``.  Intended for the small
systems that arise when reconstructing measurements; no attempt is made at
sparsity or numerical refinements beyond pivot tolerances.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class LPError(ValueError):
    pass


class InfeasibleError(LPError):
    pass


class UnboundedError(LPError):
    pass


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    objective: float
    basis: tuple[int, ...]
    iterations: int


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r] -= T[r, col] * T[row]


def _run(T, basis, ncols, tol, max_iter):
    """Bland's-rule iterations on tableau ``T`` whose last row holds reduced costs."""
    m = T.shape[0] - 1
    it = 0
    while True:
        costs = T[-1, :ncols]
        entering = next((j for j in range(ncols) if costs[j] < -tol), None)
        if entering is None:
            return it
        col = T[:m, entering]
        rows = [i for i in range(m) if col[i] > tol]
        if not rows:
            raise UnboundedError("objective is unbounded below")
        ratios = {i: T[i, -1] / col[i] for i in rows}
        lowest = min(ratios.values())
        # ties broken by the smallest basic variable index
        leave = min((i for i in rows if ratios[i] <= lowest + tol), key=lambda i: basis[i])
        _pivot(T, leave, entering)
        basis[leave] = entering
        it += 1
        if it > max_iter:
            raise LPError("simplex iteration limit reached")


def simplex_lp(c, A, b, tol: float = 1e-9, max_iter: int = 10_000) -> LPResult:
    """Minimize ``c @ x`` subject to ``A x = b``, ``x >= 0``.

    Phase one minimizes the sum of artificial variables; redundant equality
    rows are dropped when their artificial variable cannot be pivoted out.
    Entering and leaving variables follow Bland's lowest-index rule, so the
    returned vertex is deterministic.

    Raises
    ------
    InfeasibleError
        If phase one ends with a positive artificial sum (above ``tol`` scaled by ``|b|``).
    UnboundedError
        If the objective decreases without bound.
    """
    c = np.asarray(c, dtype=float).ravel()
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    m, n = A.shape
    if c.size != n or b.size != m:
        raise ValueError(f"shape mismatch: c {c.shape}, A {A.shape}, b {b.shape}")

    sign = np.where(b < 0, -1.0, 1.0)
    A = A * sign[:, None]
    b = b * sign

    # tableau columns: n originals, m artificials, rhs; last row is the objective
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))

    iters = _run(T, basis, n + m, tol, max_iter)
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    if -T[-1, -1] > tol * scale * max(m, 1) * 10:
        raise InfeasibleError(f"no feasible point (phase-one residual {-T[-1, -1]:.3g})")

    # drive remaining artificial variables out of the basis
    keep = []
    for i in range(m):
        if basis[i] >= n:
            j = next((j for j in range(n) if abs(T[i, j]) > tol), None)
            if j is None:
                continue  # redundant row
            _pivot(T, i, j)
            basis[i] = j
        keep.append(i)
    T = np.vstack([T[keep][:, list(range(n)) + [-1]], np.zeros(n + 1)])
    basis = [basis[i] for i in keep]

    # phase two objective row in reduced form
    T[-1, :n] = c
    for i, j in enumerate(basis):
        T[-1] -= c[j] * T[i]
    iters += _run(T, basis, n, tol, max_iter)

    x = np.zeros(n)
    for i, j in enumerate(basis):
        x[j] = max(T[i, -1], 0.0)
    return LPResult(x, float(c @ x), tuple(basis), iters)
