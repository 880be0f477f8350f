"""Recover optimal measurement operators from an optimal dual matrix.

Every optimal ``Pi_i`` lives in the null space of ``X - p_i rho_i``.  With
orthonormal bases ``q_ij`` of those null spaces, ``Pi_i = sum_j a_ij q_ij q_ij*``
and the coefficients are fixed by ``sum_i Pi_i = I``, a linear system
``Y a = e`` in the stacked entries of ``q q*`` and of the identity.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ensemble import Ensemble, decode_matrix_list, encode_matrix, encode_vector, parse_vector
from .linalg import eigvalsh, hermitian_eig, mvec, numerical_rank, projector
from .simplex import InfeasibleError, simplex_lp

logger = logging.getLogger(__name__)

RANK_TOL = 1e-6
COEFF_TOL = 1e-6
RESOLUTION_TOL = 1e-6


class RecoveryError(RuntimeError):
    pass


class EmptyNullSpaceError(RecoveryError):
    """No state has a null direction: the dual matrix is not optimal."""


class RankBoundError(RecoveryError):
    """A null space is larger than the rank of its state."""


class NegativeCoefficientError(RecoveryError):
    pass


class CoefficientLPError(RecoveryError):
    """The coefficient LP is infeasible; retry with a larger ``rank_tol``."""


class ResolutionError(RecoveryError):
    """Recovered operators do not sum to the identity."""


@dataclass(frozen=True, eq=False)
class NullSpaceBundle:
    """Orthonormal null-space bases, one ``n x t_i`` array per state."""

    bases: tuple[np.ndarray, ...]

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(B.shape[1] for B in self.bases)

    @property
    def n(self) -> int:
        return self.bases[0].shape[0]

    @property
    def m(self) -> int:
        return len(self.bases)

    def columns(self):
        """``(i, j, q_ij)`` in lexicographic order."""
        for i, B in enumerate(self.bases):
            for j in range(B.shape[1]):
                yield i, j, B[:, j]


@dataclass(frozen=True, eq=False)
class CoefficientSystem:
    Y: np.ndarray
    e: np.ndarray
    index: tuple[tuple[int, int], ...]

    def residual(self, a: np.ndarray) -> float:
        return float(np.max(np.abs(self.Y @ a - self.e)))


@dataclass(frozen=True, eq=False)
class Measurement:
    """An ordered POVM.  ``vectors`` holds rank-one factors when every element has rank <= 1."""

    operators: tuple[np.ndarray, ...]
    vectors: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "operators", tuple(np.asarray(P, dtype=complex) for P in self.operators))
        if self.vectors is not None:
            object.__setattr__(self, "vectors", tuple(np.asarray(v, dtype=complex).ravel() for v in self.vectors))

    @classmethod
    def from_vectors(cls, vectors) -> "Measurement":
        vectors = [np.asarray(v, dtype=complex).ravel() for v in vectors]
        return cls(tuple(projector(v) for v in vectors), tuple(vectors))

    @property
    def m(self) -> int:
        return len(self.operators)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def __len__(self):
        return self.m

    def __iter__(self):
        return iter(self.operators)

    def __getitem__(self, i):
        return self.operators[i]

    def psd_residual(self) -> float:
        return max(max(0.0, -float(eigvalsh(P)[0])) for P in self.operators)

    def resolution_residual(self) -> float:
        return float(np.max(np.abs(sum(self.operators) - np.eye(self.dim))))

    def is_valid(self, psd_tol: float = 1e-8, resolution_tol: float = RESOLUTION_TOL) -> bool:
        return self.psd_residual() <= psd_tol and self.resolution_residual() <= resolution_tol

    def to_dict(self) -> dict:
        doc = {"operators": [encode_matrix(P) for P in self.operators]}
        if self.vectors is not None:
            doc["vectors"] = [encode_vector(v) for v in self.vectors]
        return doc

    @classmethod
    def from_dict(cls, doc) -> "Measurement":
        from .ensemble import ParseError

        if not isinstance(doc, dict) or "operators" not in doc:
            raise ParseError("measurement document needs an 'operators' list")
        ops = decode_matrix_list(doc["operators"], "operators")
        vectors = None
        if "vectors" in doc:
            raw = doc["vectors"]
            if not isinstance(raw, list):
                raise ParseError("'vectors' must be a list")
            vectors = tuple(parse_vector(v, f"vectors[{k}]") for k, v in enumerate(raw))
        return cls(tuple(ops), vectors)


def null_space_basis(X: np.ndarray, e: Ensemble, rank_tol: float = RANK_TOL, check_rank: bool = True) -> NullSpaceBundle:
    """Eigenvectors of ``X - p_i rho_i`` with (numerically) zero eigenvalue.

    An eigenvalue counts as zero when it is at most
    ``rank_tol * max(lambda_max(X - p_i rho_i), tr X)``.

    Raises
    ------
    EmptyNullSpaceError
        If every null space is empty.
    RankBoundError
        If some null space is larger than ``rank(rho_i)`` (only when ``check_rank``).
    """
    X = np.asarray(X)
    scale = float(np.trace(X).real)
    bases = []
    for i, r in enumerate(e.weighted):
        w, V = hermitian_eig(X - r, herm_tol=np.inf)
        thresh = rank_tol * max(w[-1], scale)
        B = V[:, w <= thresh]
        if check_rank:
            rank = numerical_rank(e.states[i], rank_tol)
            if B.shape[1] > rank:
                raise RankBoundError(
                    f"state {i}: null space of dimension {B.shape[1]} exceeds rank {rank}"
                )
        bases.append(B)
    if all(B.shape[1] == 0 for B in bases):
        raise EmptyNullSpaceError("no state has a null direction; X is not optimal")
    return NullSpaceBundle(tuple(bases))


def assemble_system(bundle: NullSpaceBundle) -> CoefficientSystem:
    """Real form of ``Y a = e``: real parts stacked over imaginary parts."""
    cols, index = [], []
    for i, j, q in bundle.columns():
        cols.append(mvec(projector(q)))
        index.append((i, j))
    if not cols:
        raise RecoveryError("bundle contains no basis vectors")
    Yc = np.column_stack(cols)
    ec = mvec(np.eye(bundle.n, dtype=complex))
    Y = np.vstack([Yc.real, Yc.imag])
    ev = np.concatenate([ec.real, ec.imag])
    return CoefficientSystem(Y, ev, tuple(index))


def has_full_column_rank(system: CoefficientSystem, rank_tol: float = RANK_TOL) -> bool:
    s = np.linalg.svd(system.Y, compute_uv=False)
    return bool(s.size and s[-1] > rank_tol * s[0]) and system.Y.shape[0] >= system.Y.shape[1]


def solve_coefficients(
    system: CoefficientSystem, rank_tol: float = RANK_TOL, coeff_tol: float = COEFF_TOL
) -> np.ndarray:
    """Nonnegative ``a`` with ``Y a = e``.

    Full column rank: the unique least-squares solution, with negatives down
    to ``-coeff_tol`` clamped to zero.  Otherwise: ``min sum(a)`` over
    ``Y a = e, a >= 0`` by simplex.  The LP is posed on the row space of
    ``Y`` so numerically redundant rows do not make it infeasible.
    """
    Y, ev = system.Y, system.e
    if has_full_column_rank(system, rank_tol):
        a, *_ = np.linalg.lstsq(Y, ev, rcond=None)
        if a.min() < -coeff_tol:
            raise NegativeCoefficientError(f"least-squares coefficient {a.min():.3g} is negative")
        return np.clip(a, 0.0, None)

    logger.info("coefficient matrix is rank deficient; solving the LP")
    U, s, _ = np.linalg.svd(Y, full_matrices=False)
    r = int(np.sum(s > rank_tol * s[0]))
    A = U[:, :r].T @ Y
    b = U[:, :r].T @ ev
    try:
        res = simplex_lp(np.ones(Y.shape[1]), A, b)
    except InfeasibleError as exc:
        raise CoefficientLPError(f"{exc}; null-space bases may be too small, retry with a larger rank_tol") from exc
    return res.x


def build_measurement(bundle: NullSpaceBundle, a: np.ndarray, resolution_tol: float = RESOLUTION_TOL) -> Measurement:
    """``Pi_i = sum_j a_ij q_ij q_ij*``.

    Raises ``ResolutionError`` when ``max|sum Pi_i - I| > resolution_tol``.
    """
    a = np.asarray(a, dtype=float)
    n = bundle.n
    ops = [np.zeros((n, n), dtype=complex) for _ in range(bundle.m)]
    for k, (i, j, q) in enumerate(bundle.columns()):
        ops[i] += a[k] * projector(q)
    ops = [0.5 * (P + P.conj().T) for P in ops]
    vectors = None
    if all(d <= 1 for d in bundle.dims):
        vectors, k = [], 0
        for B in bundle.bases:
            if B.shape[1] == 1:
                vectors.append(np.sqrt(max(a[k], 0.0)) * B[:, 0])
                k += 1
            else:
                vectors.append(np.zeros(n, dtype=complex))
    meas = Measurement(tuple(ops), None if vectors is None else tuple(vectors))
    res = meas.resolution_residual()
    if res > resolution_tol:
        raise ResolutionError(f"operators miss the identity by {res:.3g}")
    return meas
