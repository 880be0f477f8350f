"""Mixed states, rank bounds, a state living on a subspace, and a duplicated state."""
import numpy as np

from qdetect import Ensemble, solve
from qdetect.generate import random_mixed_ensemble
from qdetect.linalg import numerical_rank, projector

e = random_mixed_ensemble(4, 3, seed=7, ranks=[1, 2, 3])
sol = solve(e)
print("state ranks       :", [numerical_rank(r, 1e-8) for r in e.states])
print("measurement ranks :", [numerical_rank(P, 1e-6) for P in sol.measurement])
print("P_d               :", sol.p_correct)
print("certified optimal :", sol.report.optimal)

# two orthogonal states inside a 3-dimensional space: solved on their span
e = Ensemble([0.5, 0.5], (projector([1, 0, 0]), projector([0, 1, 0])))
sol = solve(e)
print("\nsupport dimension :", sol.embedding.k, "of", sol.embedding.n)
print("P_d               :", sol.p_correct)
print("Pi_1 (takes the unused direction too):\n", sol.measurement.operators[0].real)

# an exact repeat makes the coefficient system singular; a linear program
# picks coefficients that still resolve the identity
r2 = np.sqrt(0.5)
e = Ensemble.from_vectors([0.4, 0.3, 0.3], [[1, 0], [r2, r2], [r2, r2]])
sol = solve(e)
print("\nduplicated state  : used LP =", sol.used_lp)
print("coefficients      :", np.round(sol.coefficients, 6))
print("duality gap       :", f"{sol.report.gap:.1e}")
