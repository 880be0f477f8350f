"""Log-det barrier solver for ``min tr(X)  s.t.  X >= p_i rho_i``.

The solver follows the central path of

    f_t(X) = t tr(X) - sum_i log det(X - p_i rho_i)

with damped Newton steps, starting from a strictly feasible multiple of the
identity.  ``X`` is handled in the real coordinates of
:func:`qdetect.linalg.hvec`, so gradients and Hessians are ordinary real
vectors and symmetric matrices of size ``n**2``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg

from .ensemble import Ensemble
from .linalg import eigvalsh, hermitian_basis, hmat, hvec

logger = logging.getLogger(__name__)

TRACE = 5  # logging level below DEBUG for per-Newton-step records
logging.addLevelName(TRACE, "TRACE")

BOUNDARY_MARGIN = 1e-14


class SolverError(RuntimeError):
    """The barrier method could not produce a certificate."""

    def __init__(self, message, X=None, bound=None, trace=None):
        super().__init__(message)
        self.X = X
        self.bound = bound
        self.trace = trace


class MaxIterationsError(SolverError):
    pass


class LineSearchError(SolverError):
    pass


class SingularHessianError(SolverError):
    pass


@dataclass(frozen=True)
class SolverOptions:
    gap_tol: float = 1e-8
    max_newton_iters: int = 200
    barrier_growth: float = 10.0
    shrink: float = 0.5
    acceptance: float = 0.01
    centering_tol: float = 1e-9
    """Stop centering once ``decrement**2 / 2`` drops below this."""
    max_outer_iters: int = 100

    def __post_init__(self):
        if not self.gap_tol > 0:
            raise ValueError("gap_tol must be positive")
        if not self.barrier_growth > 1:
            raise ValueError("barrier_growth must exceed 1")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")
        if not 0 < self.acceptance < 0.5:
            raise ValueError("acceptance must lie in (0, 0.5)")
        if self.max_newton_iters < 1:
            raise ValueError("max_newton_iters must be at least 1")


@dataclass(frozen=True, eq=False)
class DualCertificate:
    X: np.ndarray
    bound: float = math.inf
    """Proven upper bound on ``tr(X) - optimum``."""

    @property
    def objective(self) -> float:
        return float(np.trace(self.X).real)

    def slacks(self, e: Ensemble) -> list[np.ndarray]:
        return [self.X - r for r in e.weighted]

    def min_slack(self, e: Ensemble) -> float:
        return min(float(eigvalsh(S)[0]) for S in self.slacks(e))

    def is_feasible(self, e: Ensemble, tol: float = 1e-8) -> bool:
        return self.min_slack(e) >= -tol


@dataclass
class OuterRecord:
    t: float
    objective: float
    newton_iters: int
    decrement: float
    min_slack: float


@dataclass
class SolverTrace:
    records: list[OuterRecord] = field(default_factory=list)

    @property
    def newton_iters(self) -> int:
        return sum(r.newton_iters for r in self.records)

    def to_list(self) -> list[dict]:
        return [asdict(r) for r in self.records]


def initial_point(e: Ensemble) -> np.ndarray:
    """``(1 + max_i lambda_max(p_i rho_i)) I``, strictly feasible by a margin of 1."""
    top = max(float(eigvalsh(r)[-1]) for r in e.weighted)
    return (1.0 + top) * np.eye(e.dim, dtype=complex)


# --- barrier pieces ----------------------------------------------------------


def _slack_inverses(X: np.ndarray, e: Ensemble) -> list[np.ndarray]:
    out = []
    for r in e.weighted:
        S = X - r
        S = 0.5 * (S + S.conj().T)
        try:
            c = scipy.linalg.cho_factor(S, lower=True)
        except np.linalg.LinAlgError as exc:
            raise SolverError("iterate is not strictly feasible") from exc
        Sinv = scipy.linalg.cho_solve(c, np.eye(len(S)))
        out.append(0.5 * (Sinv + Sinv.conj().T))
    return out


def barrier_value(X: np.ndarray, t: float, e: Ensemble) -> float:
    """``t tr(X) - sum log det(X - rho'_i)``; ``inf`` outside the feasible set."""
    val = t * float(np.trace(X).real)
    for r in e.weighted:
        S = X - r
        S = 0.5 * (S + S.conj().T)
        try:
            L = np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            return math.inf
        val -= 2.0 * float(np.sum(np.log(np.abs(np.diag(L)))))
    return val


def barrier_gradient(X: np.ndarray, t: float, e: Ensemble, Sinvs=None) -> np.ndarray:
    """Gradient of :func:`barrier_value` in :func:`hvec` coordinates."""
    if Sinvs is None:
        Sinvs = _slack_inverses(X, e)
    G = t * np.eye(e.dim) - sum(Sinvs)
    return hvec(G)


def barrier_hessian(X: np.ndarray, t: float, e: Ensemble, Sinvs=None) -> np.ndarray:
    """Hessian of :func:`barrier_value` in :func:`hvec` coordinates.

    Entry ``(k, l)`` is ``sum_i tr(E_k S_i^-1 E_l S_i^-1)`` for the
    orthonormal Hermitian basis ``E``.  The sum over ``i`` runs in index order.
    """
    if Sinvs is None:
        Sinvs = _slack_inverses(X, e)
    n = e.dim
    basis = hermitian_basis(n)
    H = np.zeros((n * n, n * n))
    for Sinv in Sinvs:
        # column l is hvec(Sinv E_l Sinv)
        H += hvec(Sinv @ basis @ Sinv).T
    return 0.5 * (H + H.T)


def barrier_hessian_vector(X: np.ndarray, t: float, e: Ensemble, direction: np.ndarray) -> np.ndarray:
    """Hessian-vector product ``hvec(sum_i S_i^-1 D S_i^-1)`` without forming the Hessian."""
    D = hmat(direction, e.dim)
    return hvec(sum(Sinv @ D @ Sinv for Sinv in _slack_inverses(X, e)))


def newton_step(X: np.ndarray, t: float, e: Ensemble) -> tuple[np.ndarray, float]:
    """Newton direction (as a Hermitian matrix) and Newton decrement at ``X``.

    Raises
    ------
    SingularHessianError
        If the assembled Hessian is not numerically positive definite.
    """
    Sinvs = _slack_inverses(X, e)
    g = barrier_gradient(X, t, e, Sinvs)
    H = barrier_hessian(X, t, e, Sinvs)
    try:
        c = scipy.linalg.cho_factor(H, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularHessianError("barrier Hessian is singular") from exc
    dx = -scipy.linalg.cho_solve(c, g)
    dec2 = max(float(-g @ dx), 0.0)
    return hmat(dx, e.dim), math.sqrt(dec2)


def _max_step(X: np.ndarray, D: np.ndarray, e: Ensemble) -> float:
    """Largest ``s`` keeping ``min eig(X + s D - rho'_i) >= BOUNDARY_MARGIN``, capped at 1."""
    smax = 1.0
    for r in e.weighted:
        S = X - r
        S = 0.5 * (S + S.conj().T)
        L = np.linalg.cholesky(S)
        Linv = scipy.linalg.solve_triangular(L, np.eye(len(S)), lower=True)
        # eigenvalues of L^-1 D L^-* give the generalized spectrum of (D, S)
        M = Linv @ D @ Linv.conj().T
        lo = float(eigvalsh(M)[0])
        if lo < 0:
            smax = min(smax, -1.0 / lo)
    s = smax
    # exact check against the margin; shrink until satisfied
    for _ in range(200):
        Xn = X + s * D
        if min(float(eigvalsh(Xn - r)[0]) for r in e.weighted) >= BOUNDARY_MARGIN:
            return s
        s *= 0.5
    return 0.0


def _center(X, t, e, opts: SolverOptions):
    """Minimize the barrier at fixed ``t``.  Returns ``(X, iterations, decrement)``."""
    dec = math.inf
    for it in range(1, opts.max_newton_iters + 1):
        D, dec = newton_step(X, t, e)
        logger.log(TRACE, "t=%.3e newton %d decrement %.3e", t, it, dec)
        if 0.5 * dec * dec <= opts.centering_tol:
            return X, it - 1, dec
        s = _max_step(X, D, e)
        if s <= 0.0:
            raise LineSearchError("step length collapsed at the feasibility boundary", X=X)
        if dec < 0.25:
            # quadratic-convergence region: full (feasibility-capped) step;
            # objective differences here are below round-off of f itself
            X = X + s * D
        else:
            f0 = barrier_value(X, t, e)
            slope = -dec * dec
            while True:
                fn = barrier_value(X + s * D, t, e)
                if fn <= f0 + opts.acceptance * s * slope:
                    break
                s *= opts.shrink
                if s < 1e-16:
                    raise LineSearchError("backtracking line search failed", X=X)
            X = X + s * D
        X = 0.5 * (X + X.conj().T)
    raise MaxIterationsError(
        f"centering did not converge in {opts.max_newton_iters} Newton steps (decrement {dec:.3g})", X=X
    )


def solve_dual(e: Ensemble, opts: SolverOptions | None = None) -> tuple[DualCertificate, SolverTrace]:
    """Minimize ``tr(X)`` over ``X >= p_i rho_i`` for all ``i``.

    Returns a certificate whose ``bound`` (``m n / t`` at the last centered
    point) is at most ``opts.gap_tol``.

    Raises
    ------
    MaxIterationsError, LineSearchError, SingularHessianError
        On numerical failure; the exception carries the last iterate.
    """
    opts = opts or SolverOptions()
    m, n = e.m, e.dim
    X = initial_point(e)
    # t that best centers the starting point: t I ~ sum S_i^-1
    t = max(float(np.trace(sum(_slack_inverses(X, e))).real) / n, 1e-3)
    target = m * n / opts.gap_tol
    trace = SolverTrace()
    prev_obj = math.inf
    for outer in range(opts.max_outer_iters):
        try:
            X, iters, dec = _center(X, t, e, opts)
        except SolverError as exc:
            exc.bound = m * n / t
            exc.trace = trace
            raise
        obj = float(np.trace(X).real)
        rec = OuterRecord(t, obj, iters, dec, DualCertificate(X).min_slack(e))
        trace.records.append(rec)
        logger.info("outer %d: t=%.3e tr(X)=%.12g newton=%d slack=%.3e", outer, t, obj, iters, rec.min_slack)
        if obj > prev_obj + opts.gap_tol:
            logger.warning("trace increased along the path: %.3e", obj - prev_obj)
        prev_obj = obj
        if t >= target:
            return DualCertificate(X, bound=m * n / t), trace
        t = min(t * opts.barrier_growth, target)
    raise MaxIterationsError("outer iteration limit reached", X=X, bound=m * n / t, trace=trace)
