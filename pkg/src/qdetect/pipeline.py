"""End-to-end optimal measurement: reduce, solve the dual, recover, certify."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .certify import OptimalityReport, check_optimality, helstrom_binary_pd
from .dual_solver import DualCertificate, SolverOptions, SolverTrace, solve_dual
from .ensemble import Embedding, Ensemble, reduce_to_span
from .recovery import (
    RANK_TOL,
    RecoveryError,
    CoefficientSystem,
    Measurement,
    NullSpaceBundle,
    assemble_system,
    build_measurement,
    has_full_column_rank,
    null_space_basis,
    solve_coefficients,
)

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class Solution:
    ensemble: Ensemble
    reduced: Ensemble
    embedding: Embedding
    certificate: DualCertificate
    trace: SolverTrace
    bundle: NullSpaceBundle
    system: CoefficientSystem
    coefficients: np.ndarray
    used_lp: bool
    reduced_measurement: Measurement
    measurement: Measurement
    X: np.ndarray
    report: OptimalityReport
    gap_tol: float
    """Gap tolerance of the dual solve that was finally used."""

    @property
    def p_correct(self) -> float:
        return self.report.p_correct


def embed_measurement(meas: Measurement, emb: Embedding) -> Measurement:
    if emb.is_identity:
        return meas
    ops = emb.embed_measurement(meas.operators)
    vectors = None
    if meas.vectors is not None and emb.k == emb.n:
        vectors = tuple(emb.embed_vector(v) for v in meas.vectors)
    return Measurement(tuple(ops), vectors)


def embed_dual(X: np.ndarray, emb: Embedding) -> np.ndarray:
    """``V X V*``: zero on the complement, where every state vanishes, so the trace is unchanged."""
    if emb.is_identity:
        return X
    return emb.embed(X)


MIN_GAP_TOL = 1e-12
TIGHTEN = 1e-2


def _recover(reduced: Ensemble, cert: DualCertificate, rank_tol: float):
    bundle = null_space_basis(cert.X, reduced, rank_tol)
    system = assemble_system(bundle)
    used_lp = not has_full_column_rank(system, rank_tol)
    a = solve_coefficients(system, rank_tol)
    return bundle, system, a, used_lp, build_measurement(bundle, a)


def solve(
    e: Ensemble,
    options: SolverOptions | None = None,
    rank_tol: float = RANK_TOL,
    check_tol: float = 1e-6,
) -> Solution:
    """Optimal measurement for ``e`` with an independent optimality report.

    The ensemble is first restated on the span of its states; the dual matrix
    reported in the full space is ``V X V*``, which is zero on the complement.

    Null vectors next to a small but nonzero slack eigenvalue are tilted by
    roughly ``gap_tol / slack``.  When recovery or certification fails, the
    dual is re-solved with ``gap_tol`` tightened 100-fold, down to
    ``MIN_GAP_TOL``; the last failure propagates.

    A single state needs no solve: ``X = p rho`` on the support, ``Pi = I``.
    """
    options = options or SolverOptions()
    reduced, emb = reduce_to_span(e)
    if emb.k < emb.n:
        logger.info("reduced from dimension %d to %d", emb.n, emb.k)
    while True:
        if reduced.m == 1:
            # restricted to its support the lone state is positive definite and is its own optimum
            cert, trace = DualCertificate(reduced.weighted[0].copy(), 0.0), SolverTrace()
        else:
            cert, trace = solve_dual(reduced, options)
        last = options.gap_tol <= MIN_GAP_TOL
        try:
            bundle, system, a, used_lp, reduced_meas = _recover(reduced, cert, rank_tol)
        except RecoveryError as exc:
            if last:
                raise
            logger.info("recovery failed at gap_tol=%.1e (%s); tightening", options.gap_tol, exc)
            options = replace(options, gap_tol=max(options.gap_tol * TIGHTEN, MIN_GAP_TOL))
            continue
        meas = embed_measurement(reduced_meas, emb)
        X = embed_dual(cert.X, emb)
        report = check_optimality(e, meas, X, tol=check_tol, rank_tol=rank_tol)
        if report.optimal or last:
            break
        logger.info("certification failed at gap_tol=%.1e; tightening", options.gap_tol)
        options = replace(options, gap_tol=max(options.gap_tol * TIGHTEN, MIN_GAP_TOL))
    return Solution(
        e, reduced, emb, cert, trace, bundle, system, a, used_lp, reduced_meas, meas, X, report, options.gap_tol
    )


def helstrom_or_none(e: Ensemble) -> float | None:
    return helstrom_binary_pd(e) if e.m == 2 else None
