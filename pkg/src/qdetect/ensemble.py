"""Quantum state ensembles: data model, validation, JSON I/O and span reduction."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from .linalg import eigvalsh, hermiticity_residual, hermitian_eig, projector


class EnsembleError(ValueError):
    """Base class for malformed or invalid ensemble input."""


class ParseError(EnsembleError):
    pass


class ValidationError(EnsembleError):
    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("; ".join(str(v) for v in report.violations))


@dataclass(frozen=True)
class Tolerances:
    herm_tol: float = 1e-8
    psd_tol: float = 1e-8
    trace_tol: float = 1e-8
    prior_tol: float = 1e-8

    def __post_init__(self):
        for name, value in vars(self).items():
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class Violation:
    invariant: str
    index: int | None
    magnitude: float
    message: str

    def __str__(self):
        where = "" if self.index is None else f"state {self.index}: "
        return f"{where}{self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __iter__(self):
        return iter(self.violations)

    def __len__(self):
        return len(self.violations)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Ensemble:
    """``m`` density operators on an ``n``-dimensional space with prior probabilities.

    Construction only checks shapes and finiteness; call :func:`validate`
    (or use :func:`load_ensemble`) to enforce the physical invariants.
    ``vectors`` holds the state vectors when the ensemble was built from pure
    states, otherwise it is ``None``.
    """

    priors: np.ndarray
    states: tuple[np.ndarray, ...]
    vectors: tuple[np.ndarray, ...] | None = None
    weighted: tuple[np.ndarray, ...] = field(init=False, repr=False)

    def __post_init__(self):
        priors = np.array(self.priors, dtype=float).reshape(-1)
        priors.setflags(write=False)
        states = tuple(_readonly(rho) for rho in self.states)
        if len(states) == 0:
            raise EnsembleError("ensemble must contain at least one state")
        if len(priors) != len(states):
            raise EnsembleError(f"{len(priors)} priors for {len(states)} states")
        n = states[0].shape[0] if states[0].ndim == 2 else -1
        for i, rho in enumerate(states):
            if rho.ndim != 2 or rho.shape != (n, n):
                raise EnsembleError(f"state {i}: expected a {n}x{n} matrix, got shape {rho.shape}")
            if not np.all(np.isfinite(rho)):
                raise EnsembleError(f"state {i}: non-finite entries")
        if not np.all(np.isfinite(priors)):
            raise EnsembleError("non-finite prior")
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "states", states)
        if self.vectors is not None:
            object.__setattr__(self, "vectors", tuple(_readonly(np.ravel(v)) for v in self.vectors))
        object.__setattr__(self, "weighted", tuple(_readonly(p * rho) for p, rho in zip(priors, states)))

    @classmethod
    def from_vectors(cls, priors: Sequence[float], vectors: Iterable) -> "Ensemble":
        vectors = [np.asarray(v, dtype=complex).reshape(-1) for v in vectors]
        return cls(priors, tuple(projector(v) for v in vectors), vectors=tuple(vectors))

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    @property
    def m(self) -> int:
        return len(self.states)

    @property
    def is_pure(self) -> bool:
        return self.vectors is not None

    def __len__(self):
        return self.m


def validate(e: Ensemble, tolerances: Tolerances = DEFAULT_TOLERANCES) -> ValidationReport:
    """List every violated ensemble invariant; an empty report means valid."""
    tol = tolerances
    out: list[Violation] = []
    for i, p in enumerate(e.priors):
        if not p > 0:
            out.append(Violation("prior_positive", i, float(p), f"prior {p:.12g} is not strictly positive"))
    total = float(np.sum(e.priors))
    if abs(total - 1.0) > tol.prior_tol:
        out.append(Violation("prior_sum", None, abs(total - 1.0), f"priors sum to {total:.12g}"))
    for i, rho in enumerate(e.states):
        herm = hermiticity_residual(rho)
        if herm > tol.herm_tol:
            out.append(Violation("hermitian", i, herm, f"not Hermitian (max|M - M*| = {herm:.3g})"))
        lo = float(eigvalsh(rho)[0])
        if lo < -tol.psd_tol:
            out.append(Violation("psd", i, -lo, f"not PSD (smallest eigenvalue {lo:.3g})"))
        tr = complex(np.trace(rho))
        if abs(tr - 1.0) > tol.trace_tol:
            out.append(Violation("unit_trace", i, abs(tr - 1.0), f"trace is {tr.real:.12g}, not 1"))
    if e.vectors is not None:
        for i, v in enumerate(e.vectors):
            norm = float(np.linalg.norm(v))
            if abs(norm - 1.0) > tol.trace_tol:
                out.append(Violation("unit_vector", i, abs(norm - 1.0), f"vector norm is {norm:.12g}, not 1"))
    return ValidationReport(tuple(out))


# --- JSON ------------------------------------------------------------------


def _complex(x, where: str) -> complex:
    if (
        not isinstance(x, (list, tuple))
        or len(x) != 2
        or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in x)
    ):
        raise ParseError(f"{where}: complex scalars must be [re, im] pairs, got {x!r}")
    return complex(x[0], x[1])


def parse_vector(doc, where: str = "vector") -> np.ndarray:
    if not isinstance(doc, list) or not doc:
        raise ParseError(f"{where}: expected a non-empty list of [re, im] pairs")
    return np.array([_complex(x, f"{where}[{k}]") for k, x in enumerate(doc)])


def parse_matrix(doc, where: str = "matrix") -> np.ndarray:
    if not isinstance(doc, list) or not doc:
        raise ParseError(f"{where}: expected a non-empty list of rows")
    rows = [parse_vector(r, f"{where}[{k}]") for k, r in enumerate(doc)]
    if len({len(r) for r in rows}) != 1:
        raise ParseError(f"{where}: ragged rows")
    return np.array(rows)


def decode_matrix_list(doc, where: str) -> list[np.ndarray]:
    if not isinstance(doc, list) or not doc:
        raise ParseError(f"{where}: expected a non-empty list of matrices")
    mats = [parse_matrix(M, f"{where}[{k}]") for k, M in enumerate(doc)]
    shapes = {M.shape for M in mats}
    if len(shapes) != 1 or mats[0].shape[0] != mats[0].shape[1]:
        raise ParseError(f"{where}: matrices must be square and of equal size, got {sorted(shapes)}")
    return mats


def encode_vector(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex).ravel()]


def encode_matrix(M) -> list:
    return [encode_vector(row) for row in np.asarray(M, dtype=complex)]


def ensemble_from_dict(doc, tolerances: Tolerances = DEFAULT_TOLERANCES) -> Ensemble:
    """Build and validate an ensemble from its decoded JSON document."""
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    n = doc.get("dim")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError(f"'dim' must be a positive integer, got {n!r}")
    entries = doc.get("states")
    if not isinstance(entries, list) or not entries:
        raise ParseError("'states' must be a non-empty list")
    priors, states, vectors = [], [], []
    for i, entry in enumerate(entries):
        where = f"states[{i}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{where}: expected an object")
        prior = entry.get("prior")
        if not isinstance(prior, (int, float)) or isinstance(prior, bool):
            raise ParseError(f"{where}: missing numeric 'prior'")
        has_vec, has_mat = "vector" in entry, "matrix" in entry
        if has_vec == has_mat:
            raise ParseError(f"{where}: exactly one of 'vector' or 'matrix' is required")
        if has_vec:
            v = parse_vector(entry["vector"], f"{where}.vector")
            if v.shape != (n,):
                raise ParseError(f"{where}.vector: length {v.size}, expected {n}")
            vectors.append(v)
            states.append(projector(v))
        else:
            M = parse_matrix(entry["matrix"], f"{where}.matrix")
            if M.shape != (n, n):
                raise ParseError(f"{where}.matrix: shape {M.shape}, expected ({n}, {n})")
            states.append(M)
        priors.append(float(prior))
    pure = len(vectors) == len(states)
    try:
        e = Ensemble(priors, tuple(states), vectors=tuple(vectors) if pure else None)
    except EnsembleError as exc:
        raise ParseError(str(exc)) from exc
    report = validate(e, tolerances)
    if not report.ok:
        raise ValidationError(report)
    return e


def load_ensemble(source: IO | str | bytes, tolerances: Tolerances = DEFAULT_TOLERANCES) -> Ensemble:
    """Read an ensemble document from a binary/text stream, bytes or a string.

    Pure states given as ``"vector"`` are expanded to ``|v><v|``.  Vectors
    whose norm is off by more than ``trace_tol`` are rejected, not rescaled.

    Raises
    ------
    ParseError
        Malformed JSON or document structure.
    ValidationError
        The document parses but violates an ensemble invariant.
    """
    raw = source if isinstance(source, (str, bytes, bytearray)) else source.read()
    try:
        doc = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return ensemble_from_dict(doc, tolerances)


def ensemble_to_dict(e: Ensemble) -> dict:
    if e.vectors is not None:
        states = [{"prior": float(p), "vector": encode_vector(v)} for p, v in zip(e.priors, e.vectors)]
    else:
        states = [{"prior": float(p), "matrix": encode_matrix(rho)} for p, rho in zip(e.priors, e.states)]
    return {"dim": e.dim, "states": states}


# --- subspace reduction ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class Embedding:
    """Isometry ``V`` (``n x k``) from the span of the ensemble into the full space."""

    V: np.ndarray

    @classmethod
    def identity(cls, n: int) -> "Embedding":
        return cls(np.eye(n, dtype=complex))

    @property
    def n(self) -> int:
        return self.V.shape[0]

    @property
    def k(self) -> int:
        return self.V.shape[1]

    @property
    def is_identity(self) -> bool:
        return self.k == self.n and np.array_equal(self.V, np.eye(self.n))

    def restrict(self, A: np.ndarray) -> np.ndarray:
        """``V* A V``: full-space operator to the span."""
        return self.V.conj().T @ A @ self.V

    def embed(self, A: np.ndarray) -> np.ndarray:
        """``V A V*``: span operator to the full space (zero on the complement)."""
        return self.V @ A @ self.V.conj().T

    def embed_vector(self, v: np.ndarray) -> np.ndarray:
        return self.V @ v

    def complement_projector(self) -> np.ndarray:
        return np.eye(self.n) - self.V @ self.V.conj().T

    def embed_measurement(self, operators: Sequence[np.ndarray]) -> list[np.ndarray]:
        """Embed a POVM on the span; identity on the complement goes to outcome 0."""
        ops = [self.embed(P) for P in operators]
        if self.k < self.n:
            ops[0] = ops[0] + self.complement_projector()
        return ops


def span_basis(e: Ensemble, rank_tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis of the joint support of all states (columns)."""
    # The support of a sum of PSD operators is the union of their supports.
    total = sum(e.states)
    w, V = hermitian_eig(total, herm_tol=np.inf)
    keep = w > rank_tol * max(w[-1], 1e-300)
    return V[:, keep]


def reduce_to_span(e: Ensemble, rank_tol: float = 1e-8) -> tuple[Ensemble, Embedding]:
    """Restate ``e`` on the span of its states' eigenvectors.

    Returns ``(e, identity)`` unchanged when the states already span the
    whole space.
    """
    B = span_basis(e, rank_tol)
    k = B.shape[1]
    if k == e.dim:
        return e, Embedding.identity(e.dim)
    emb = Embedding(B)
    states = tuple(emb.restrict(rho) for rho in e.states)
    states = tuple(0.5 * (s + s.conj().T) for s in states)
    vectors = None
    if e.vectors is not None:
        vectors = tuple(B.conj().T @ v for v in e.vectors)
    return Ensemble(e.priors, states, vectors=vectors), emb
