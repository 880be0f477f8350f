"""Optimal measurement vs the least-squares measurement, with plot-ready coordinates."""
import numpy as np

from qdetect import Ensemble, PureEnsembleView, lsm_prob_correct, lsm_vectors, solve
from qdetect.generate import random_pure_ensemble

np.set_printoptions(precision=4, suppress=True)

r2 = np.sqrt(0.5)
e = Ensemble.from_vectors([0.1, 0.6, 0.3], [[1, 0], [r2, r2], [0, 1]])
sol = solve(e)
view = PureEnsembleView.from_ensemble(e)

print("optimal P_d       :", round(sol.p_correct, 6))
print("least-squares P_d :", round(lsm_prob_correct(view), 6))

# real 2-d coordinates for a picture: weighted states, optimal and LSM vectors
psi = view.weighted.T.real
mu = np.array([v.real for v in sol.measurement.vectors])
chi = lsm_vectors(view).T.real
print("\n   i      sqrt(p) psi           mu                 chi")
for i in range(e.m):
    print(f"  {i + 1}   {psi[i]}   {mu[i]}   {chi[i]}")

# the gap between the two over random ensembles
print("\nrandom pure ensembles in dimension 3, 5 states:")
gaps = []
for seed in range(20):
    r = random_pure_ensemble(3, 5, seed)
    gaps.append(solve(r).p_correct - lsm_prob_correct(PureEnsembleView.from_ensemble(r)))
gaps = np.array(gaps)
print(f"  optimal - LSM: mean {gaps.mean():.4f}, max {gaps.max():.4f}, min {gaps.min():.2e}")
