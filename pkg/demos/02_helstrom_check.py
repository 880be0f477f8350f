"""Two states: the solver against the closed-form two-state optimum."""
import numpy as np

from qdetect import solve
from qdetect.certify import helstrom_binary_pd
from qdetect.generate import random_mixed_ensemble, random_pure_ensemble

rng = np.random.default_rng(2024)

print(f"{'n':>2} {'kind':>6} {'solver':>12} {'closed form':>12} {'diff':>9}")
for k in range(12):
    n = 2 + k % 3
    kind = "pure" if k % 2 else "mixed"
    e = random_pure_ensemble(n, 2, rng) if kind == "pure" else random_mixed_ensemble(n, 2, rng)
    pd = solve(e).p_correct
    ref = helstrom_binary_pd(e)  # (1 + ||p1 rho1 - p2 rho2||_1) / 2
    print(f"{n:>2} {kind:>6} {pd:12.9f} {ref:12.9f} {abs(pd - ref):9.1e}")
