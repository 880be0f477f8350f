"""Least-squares (square-root) measurement for pure-state ensembles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import Ensemble
from .linalg import inv_sqrt_psd
from .recovery import Measurement


class NotPureError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PureEnsembleView:
    priors: np.ndarray
    states: np.ndarray
    """State vectors as columns, ``n x m``."""

    @classmethod
    def from_ensemble(cls, e: Ensemble, rank_tol: float = 1e-8) -> "PureEnsembleView":
        if e.vectors is not None:
            return cls(e.priors, np.column_stack(e.vectors))
        cols = []
        for i, rho in enumerate(e.states):
            w, V = np.linalg.eigh(0.5 * (rho + rho.conj().T))
            if np.sum(w > rank_tol * w[-1]) != 1:
                raise NotPureError(f"state {i} is not rank one")
            cols.append(np.sqrt(w[-1]) * V[:, -1])
        return cls(e.priors, np.column_stack(cols))

    @property
    def weighted(self) -> np.ndarray:
        """``Psi``: columns ``sqrt(p_i) phi_i``."""
        return self.states * np.sqrt(self.priors)


def lsm_vectors(view: PureEnsembleView) -> np.ndarray:
    """Columns ``chi_i = (Psi Psi*)^(-1/2) psi_i``.

    Raises ``np.linalg.LinAlgError`` if the states do not span the space;
    reduce the ensemble to its span first.
    """
    Psi = view.weighted
    return inv_sqrt_psd(Psi @ Psi.conj().T) @ Psi


def lsm_measurement(view: PureEnsembleView) -> Measurement:
    chi = lsm_vectors(view)
    return Measurement.from_vectors(chi.T)


def lsm_prob_correct(view: PureEnsembleView) -> float:
    chi = lsm_vectors(view)
    overlaps = np.einsum("ki,ki->i", chi.conj(), view.states)
    return float(np.sum(view.priors * np.abs(overlaps) ** 2))
