"""Seeded random ensembles for testing and demos."""
from __future__ import annotations

import numpy as np

from .ensemble import Ensemble


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_unit_vector(n: int, rng) -> np.ndarray:
    """Uniform on the complex unit sphere."""
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_priors(m: int, rng) -> np.ndarray:
    """Uniform on the probability simplex."""
    p = rng.dirichlet(np.ones(m))
    # keep priors away from zero so every state matters numerically
    p = np.maximum(p, 1e-3)
    return p / p.sum()


def random_density(n: int, rank: int, rng) -> np.ndarray:
    G = (rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))) / np.sqrt(2)
    rho = G @ G.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_pure_ensemble(n: int, m: int, seed=None) -> Ensemble:
    rng = _rng(seed)
    vectors = [random_unit_vector(n, rng) for _ in range(m)]
    return Ensemble.from_vectors(random_priors(m, rng), vectors)


def random_mixed_ensemble(n: int, m: int, seed=None, ranks=None) -> Ensemble:
    """Random ensemble with state ranks drawn from ``1..n`` unless ``ranks`` is given."""
    rng = _rng(seed)
    if ranks is None:
        ranks = rng.integers(1, n + 1, size=m)
    states = tuple(random_density(n, int(r), rng) for r in ranks)
    return Ensemble(random_priors(m, rng), states)
