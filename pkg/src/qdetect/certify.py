"""Independent optimality checks for a (measurement, dual matrix) pair.

Nothing here touches solver or recovery internals: every quantity is
recomputed from the ensemble, the measurement operators and ``X`` using
plain numpy, so a passing report is evidence rather than a restatement.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ensemble import Ensemble


class DimensionError(ValueError):
    pass


def _eigvalsh(M):
    return np.linalg.eigvalsh(0.5 * (M + M.conj().T))


def _maxabs(M) -> float:
    return float(np.max(np.abs(M))) if np.size(M) else 0.0


def _rank(M, rel_tol):
    # operators here are bounded by the identity, so the threshold never
    # drops below rel_tol itself; round-off-sized matrices count as rank 0
    w = np.abs(_eigvalsh(M))
    return int(np.sum(w > rel_tol * max(w.max(initial=0.0), 1.0)))


def _support(e: Ensemble, rel_tol: float = 1e-8) -> np.ndarray:
    w, V = np.linalg.eigh(sum(e.states))
    return V[:, w > rel_tol * w[-1]]


def _operators(measurement) -> list[np.ndarray]:
    ops = getattr(measurement, "operators", measurement)
    return [np.asarray(P, dtype=complex) for P in ops]


def _check_dims(e: Ensemble, ops):
    if len(ops) != e.m:
        raise DimensionError(f"measurement has {len(ops)} operators for {e.m} states")
    for i, P in enumerate(ops):
        if P.shape != (e.dim, e.dim):
            raise DimensionError(f"operator {i} has shape {P.shape}, expected ({e.dim}, {e.dim})")


def prob_correct(e: Ensemble, measurement) -> float:
    """Probability of correct detection ``sum_i p_i tr(rho_i Pi_i)``."""
    ops = _operators(measurement)
    _check_dims(e, ops)
    total = sum(np.trace(r @ P) for r, P in zip(e.weighted, ops))
    return float(np.real(total))


def helstrom_binary_pd(e: Ensemble) -> float:
    """Closed-form optimum for two states: ``(1 + ||p1 rho1 - p2 rho2||_1) / 2``."""
    if e.m != 2:
        raise ValueError(f"Helstrom formula needs exactly two states, got {e.m}")
    D = e.weighted[0] - e.weighted[1]
    return 0.5 * (1.0 + float(np.sum(np.abs(_eigvalsh(D)))))


@dataclass
class Condition:
    residual: float
    passed: bool


@dataclass
class OptimalityReport:
    p_correct: float
    dual_objective: float | None
    gap: float | None
    tol: float
    conditions: dict[str, Condition] = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return all(self.conditions[k].passed for k in ("psd", "resolution"))

    @property
    def optimal(self) -> bool:
        """Verdict: every condition holds within ``tol``; ``False`` without a dual matrix."""
        if self.dual_objective is None:
            return False
        return all(c.passed for c in self.conditions.values())

    def residuals(self) -> dict[str, float]:
        return {k: c.residual for k, c in self.conditions.items()}

    def to_dict(self) -> dict:
        return {
            "p_correct": self.p_correct,
            "dual_objective": self.dual_objective,
            "gap": self.gap,
            "tol": self.tol,
            "feasible": self.feasible,
            "optimal": self.optimal if self.dual_objective is not None else None,
            "conditions": {k: {"residual": c.residual, "passed": c.passed} for k, c in self.conditions.items()},
        }


def check_optimality(
    e: Ensemble,
    measurement,
    X: np.ndarray | None = None,
    tol: float = 1e-6,
    rank_tol: float = 1e-6,
) -> OptimalityReport:
    """Evaluate the optimality conditions for ``measurement`` (and ``X`` if given).

    Residuals are max-norm magnitudes:

    ``psd``            largest negative eigenvalue of any ``Pi_i``
    ``resolution``     ``max|sum Pi_i - I|``
    ``dual_feasibility`` largest negative eigenvalue of ``X - p_i rho_i``
    ``slackness``      ``max_i max|(X - p_i rho_i) Pi_i|``
    ``hermiticity``    ``max|G - G*|`` with ``G = sum p_i rho_i Pi_i``
    ``dominance``      largest negative eigenvalue of ``G - p_j rho_j``
    ``gap``            ``|tr X - P_d|``
    ``rank_bound``     number of operators with ``rank(Pi_i) > rank(rho_i)`` on the
                       span of the states

    Without ``X`` only the measurement conditions are evaluated and no
    optimality verdict is given.
    """
    ops = _operators(measurement)
    _check_dims(e, ops)
    n = e.dim
    pd = prob_correct(e, ops)
    conds: dict[str, Condition] = {}

    def add(name, value):
        conds[name] = Condition(float(value), bool(value <= tol))

    add("psd", max(max(0.0, -_eigvalsh(P)[0]) for P in ops))
    add("resolution", _maxabs(sum(ops) - np.eye(n)))
    # ranks are compared on the support of the ensemble; outside it the
    # measurement is an arbitrary completion of the identity
    B = _support(e)
    violations = sum(
        _rank(B.conj().T @ P @ B, rank_tol) > _rank(rho, rank_tol) for P, rho in zip(ops, e.states)
    )
    conds["rank_bound"] = Condition(float(violations), violations == 0)
    if X is None:
        return OptimalityReport(pd, None, None, tol, conds)

    X = np.asarray(X, dtype=complex)
    if X.shape != (n, n):
        raise DimensionError(f"X has shape {X.shape}, expected ({n}, {n})")
    dual = float(np.trace(X).real)
    add("dual_feasibility", max(max(0.0, -_eigvalsh(X - r)[0]) for r in e.weighted))
    add("slackness", max(_maxabs((X - r) @ P) for r, P in zip(e.weighted, ops)))
    G = sum(r @ P for r, P in zip(e.weighted, ops))
    add("hermiticity", _maxabs(G - G.conj().T))
    Gh = 0.5 * (G + G.conj().T)
    add("dominance", max(max(0.0, -_eigvalsh(Gh - r)[0]) for r in e.weighted))
    gap = dual - pd
    add("gap", abs(gap))
    return OptimalityReport(pd, dual, gap, tol, conds)
