"""Three pure qubit states: dual matrix, null vectors, measurement, certificate."""
import numpy as np

from qdetect import Ensemble, solve

np.set_printoptions(precision=4, suppress=True)

r2 = np.sqrt(0.5)
e = Ensemble.from_vectors([0.1, 0.6, 0.3], [[1, 0], [r2, r2], [0, 1]])
print("priors:", e.priors)
print("weighted states p_i rho_i:")
for r in e.weighted:
    print(r.real)

sol = solve(e)

print("\nDual optimum X (smallest trace with X >= p_i rho_i for all i):")
print(sol.X.real)
print("tr X =", np.trace(sol.X).real)

print("\nNull space dimension of X - p_i rho_i for each state:", sol.bundle.dims)
print("The first state gets an empty null space: it is never the detected outcome.")
for i, B in enumerate(sol.bundle.bases):
    if B.shape[1]:
        print(f"  q_{i + 1} =", B[:, 0].real)

print("\nCoefficients solving sum_i a_i q_i q_i* = I:", sol.coefficients)
print("Measurement operators:")
for i, P in enumerate(sol.measurement):
    print(f"  Pi_{i + 1} =\n{P.real}")

print("\nprobability of a correct decision:", sol.p_correct)
print("closed form 0.45 + 0.15 sqrt 5   :", 0.45 + 0.15 * np.sqrt(5))

print("\nOptimality conditions (residuals):")
for k, v in sol.report.residuals().items():
    print(f"  {k:>16}: {v:.2e}")
print("certified optimal:", sol.report.optimal)
