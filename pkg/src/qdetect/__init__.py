"""Minimum-error quantum measurements by semidefinite duality."""

__version__ = "0.1.0"

from .certify import OptimalityReport, check_optimality, helstrom_binary_pd, prob_correct
from .dual_solver import DualCertificate, SolverOptions, SolverTrace, initial_point, newton_step, solve_dual
from .ensemble import (
    Embedding,
    Ensemble,
    ParseError,
    Tolerances,
    ValidationError,
    ensemble_to_dict,
    load_ensemble,
    reduce_to_span,
    validate,
)
from .lsm import PureEnsembleView, lsm_measurement, lsm_prob_correct, lsm_vectors
from .pipeline import Solution, solve
from .recovery import (
    CoefficientSystem,
    Measurement,
    NullSpaceBundle,
    assemble_system,
    build_measurement,
    null_space_basis,
    solve_coefficients,
)
from .simplex import simplex_lp
