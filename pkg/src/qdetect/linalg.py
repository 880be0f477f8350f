"""Dense Hermitian linear algebra used throughout the package.

Everything here works on plain ``numpy`` arrays.  Hermitian operators on an
``n``-dimensional space are also given a real coordinate system of size
``n**2`` (:func:`hvec` / :func:`hmat`) in which the trace inner product
``tr(A B)`` becomes the ordinary Euclidean dot product.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

HERM_TOL = 1e-8
EIG_TOL = 1e-10


class NotHermitianError(ValueError):
    """Raised when an operator expected to be Hermitian is not."""


class EigenvalueError(np.linalg.LinAlgError):
    """Raised when the dense eigensolver fails to converge."""


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral decomposition ``M = V diag(w) V*`` with ``w`` ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __iter__(self):
        # allows ``w, V = hermitian_eig(M)``
        yield self.eigenvalues
        yield self.eigenvectors

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


def hermiticity_residual(M: np.ndarray) -> float:
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(M - M.conj().T)))


def check_hermitian(M: np.ndarray, tol: float = HERM_TOL) -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotHermitianError(f"expected a square matrix, got shape {M.shape}")
    res = hermiticity_residual(M)
    if not res <= tol:
        raise NotHermitianError(f"matrix is not Hermitian: max|M - M*| = {res:.3g} > {tol:.3g}")
    return M


def hermitian_eig(M: np.ndarray, herm_tol: float = HERM_TOL) -> EigenDecomposition:
    """Full eigendecomposition of a Hermitian matrix.

    Eigenvalues are returned in ascending order and the eigenvector columns
    are orthonormal.  Eigenvector phases are arbitrary.

    Raises
    ------
    NotHermitianError
        If ``max|M - M*| > herm_tol``.
    EigenvalueError
        If LAPACK fails to converge.
    """
    M = check_hermitian(M, herm_tol)
    # symmetrize so round-off in the input does not leak into the spectrum
    H = 0.5 * (M + M.conj().T)
    try:
        w, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise EigenvalueError(f"eigensolver failed: {exc}") from exc
    return EigenDecomposition(w, V)


def eigvalsh(M: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of the Hermitian part of ``M`` (no checks)."""
    M = np.asarray(M)
    return np.linalg.eigvalsh(0.5 * (M + M.conj().T))


def min_eig(M: np.ndarray) -> float:
    return float(eigvalsh(M)[0])


def is_psd(M: np.ndarray, tol: float = 1e-8, herm_tol: float = HERM_TOL) -> bool:
    """True iff the smallest eigenvalue of Hermitian ``M`` is ``>= -tol``."""
    w, _ = hermitian_eig(M, herm_tol)
    return bool(w[0] >= -tol)


def numerical_rank(M: np.ndarray, rel_tol: float = 1e-6) -> int:
    """Number of eigenvalues above ``rel_tol * max|eigenvalue|``."""
    w = np.abs(eigvalsh(M))
    if w.size == 0 or w.max() == 0.0:
        return 0
    return int(np.sum(w > rel_tol * w.max()))


def inv_sqrt_psd(M: np.ndarray, psd_tol: float = 1e-8, herm_tol: float = HERM_TOL) -> np.ndarray:
    """Inverse of the unique PSD square root of a positive definite matrix.

    Raises ``np.linalg.LinAlgError`` when the smallest eigenvalue is not
    above ``psd_tol`` (singular or indefinite input).
    """
    w, V = hermitian_eig(M, herm_tol)
    if w[0] <= psd_tol:
        raise np.linalg.LinAlgError(
            f"matrix is not positive definite (smallest eigenvalue {w[0]:.3g})"
        )
    R = (V / np.sqrt(w)) @ V.conj().T
    return 0.5 * (R + R.conj().T)


def mvec(M: np.ndarray) -> np.ndarray:
    """Stack the columns of ``M`` into a single vector."""
    return np.asarray(M).reshape(-1, order="F")


def ket(v) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(-1)


def projector(v) -> np.ndarray:
    """``|v><v|`` for a vector ``v`` (not normalized)."""
    v = ket(v)
    return np.outer(v, v.conj())


# --- real coordinates for Hermitian matrices -------------------------------

_SQRT2 = np.sqrt(2.0)


@lru_cache(maxsize=None)
def _triu(n: int):
    return np.triu_indices(n, k=1)


def hvec(X: np.ndarray) -> np.ndarray:
    """Real coordinates of a Hermitian matrix (or a stack of them along axis 0).

    Layout: the ``n`` diagonal entries, then ``sqrt(2) Re X[i, j]`` and then
    ``sqrt(2) Im X[i, j]`` for the strict upper triangle in row-major order.
    With this scaling ``hvec(A) @ hvec(B) == tr(A B)`` for Hermitian A, B.
    """
    X = np.asarray(X)
    n = X.shape[-1]
    iu = _triu(n)
    upper = X[..., iu[0], iu[1]]
    diag = np.real(np.diagonal(X, axis1=-2, axis2=-1))
    return np.concatenate([diag, _SQRT2 * upper.real, _SQRT2 * upper.imag], axis=-1)


def hmat(x: np.ndarray, n: int | None = None) -> np.ndarray:
    """Inverse of :func:`hvec`."""
    x = np.asarray(x, dtype=float)
    if n is None:
        n = int(round(np.sqrt(x.size)))
    if n * n != x.size:
        raise ValueError(f"coordinate vector of length {x.size} is not n**2")
    iu = _triu(n)
    k = len(iu[0])
    X = np.zeros((n, n), dtype=complex)
    X[np.diag_indices(n)] = x[:n]
    X[iu] = (x[n : n + k] + 1j * x[n + k :]) / _SQRT2
    X[(iu[1], iu[0])] = np.conj(X[iu])
    return X


@lru_cache(maxsize=32)
def hermitian_basis(n: int) -> np.ndarray:
    """Orthonormal basis (trace inner product) matching :func:`hvec`, shape ``(n*n, n, n)``."""
    B = np.array([hmat(e, n) for e in np.eye(n * n)])
    B.setflags(write=False)
    return B
