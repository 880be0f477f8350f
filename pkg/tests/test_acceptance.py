"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (the lines are repeated in the terminal summary) or directly:

    python tests/test_acceptance.py
"""
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import EX_A, EX_LSM_PD, EX_MU, EX_PD, EX_PRIORS, EX_VECTORS, EX_X_HAT, proj  # noqa: E402
from qdetect import Ensemble, PureEnsembleView, check_optimality, lsm_prob_correct, solve  # noqa: E402
from qdetect.certify import helstrom_binary_pd  # noqa: E402
from qdetect.dual_solver import barrier_gradient, barrier_hessian_vector, barrier_value, initial_point  # noqa: E402
from qdetect.generate import random_mixed_ensemble, random_pure_ensemble, random_unit_vector  # noqa: E402
from qdetect.linalg import hmat, hvec, numerical_rank  # noqa: E402
from qdetect.simplex import InfeasibleError, simplex_lp  # noqa: E402
from test_simplex import brute_force_lp  # noqa: E402

RESULTS = []


def record(name, passed, detail):
    line = f"{name:<28} {'PASS' if passed else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    return passed


def worked_example():
    return Ensemble.from_vectors(EX_PRIORS, EX_VECTORS)


# --- 1. golden example ---------------------------------------------------------


def test_c1_dual_matrix():
    sol = solve(worked_example())
    err = np.max(np.abs(sol.X - EX_X_HAT))
    assert record("C1 X_hat", err <= 2e-3, f"max |X - X_ref| = {err:.2e} (tol 2e-3)")


def test_c1_coefficients():
    # one weight per outcome: a_i = tr Pi_i, i.e. the coefficient of the unit
    # null vector q_i, zero when outcome i has an empty null space
    sol = solve(worked_example())
    a = np.array([np.trace(P).real for P in sol.measurement])
    err = np.max(np.abs(a - EX_A))
    assert record(
        "C1 coefficients", err <= 2e-3, f"a = {np.round(a, 6).tolist()} vs {EX_A.tolist()}, max err {err:.2e} (tol 2e-3)"
    )


def test_c1_projectors():
    sol = solve(worked_example())
    err = max(np.max(np.abs(P - proj(mu))) for P, mu in zip(sol.measurement, EX_MU))
    assert record("C1 projectors", err <= 5e-3, f"max |Pi - mu mu*| = {err:.2e} (tol 5e-3)")


def test_c1_runtime():
    t0 = time.perf_counter()
    solve(worked_example())
    dt = time.perf_counter() - t0
    assert record("C1 runtime", dt < 1.0, f"{dt:.3f} s (limit 1 s)")


# --- 2. objectives -------------------------------------------------------------


def test_c2_optimal_pd():
    t0 = time.perf_counter()
    pd = solve(worked_example()).p_correct
    dt = time.perf_counter() - t0
    err = abs(pd - EX_PD)
    assert record("C2 optimal P_d", err <= 5e-3 and dt < 1, f"P_d = {pd:.6f} vs {EX_PD}, err {err:.2e} (tol 5e-3), {dt:.3f} s")


def test_c2_lsm_pd():
    t0 = time.perf_counter()
    pd = lsm_prob_correct(PureEnsembleView.from_ensemble(worked_example()))
    dt = time.perf_counter() - t0
    err = abs(pd - EX_LSM_PD)
    assert record("C2 LSM P_d", err <= 5e-3 and dt < 1, f"P_d = {pd:.6f} vs {EX_LSM_PD}, err {err:.2e} (tol 5e-3), {dt:.3f} s")


# --- 3. two-state oracle -----------------------------------------------------


def test_c3_helstrom():
    t0 = time.perf_counter()
    worst, count = 0.0, 0
    for seed in range(120):
        n = 2 + seed % 3
        rng = np.random.default_rng(30_000 + seed)
        e = random_pure_ensemble(n, 2, rng) if seed % 2 else random_mixed_ensemble(n, 2, rng)
        worst = max(worst, abs(solve(e).p_correct - helstrom_binary_pd(e)))
        count += 1
    dt = time.perf_counter() - t0
    ok = worst <= 1e-6 and dt < 30
    assert record("C3 Helstrom oracle", ok, f"{count} ensembles, max |dP| = {worst:.2e} (tol 1e-6), {dt:.1f} s (limit 30 s)")


# --- 4. optimality conditions ----------------------------------------------------


def test_c4_optimality_conditions():
    t0 = time.perf_counter()
    failures, worst, count = [], {}, 0
    for seed in range(150):
        rng = np.random.default_rng(40_000 + seed)
        n, m = int(rng.integers(1, 5)), int(rng.integers(1, 6))
        e = random_mixed_ensemble(n, m, rng)
        sol = solve(e)
        # independent re-check of the delivered pair
        rep = check_optimality(e, sol.measurement, sol.X, tol=1e-6)
        for k, v in rep.residuals().items():
            worst[k] = max(worst.get(k, 0.0), v)
        if not (rep.optimal and rep.gap <= 1e-6):
            failures.append(seed)
        count += 1
    dt = time.perf_counter() - t0
    ok = not failures and dt < 60
    summary = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    assert record("C4 optimality conditions", ok, f"{count} ensembles, {len(failures)} failures, {dt:.1f} s; worst: {summary}")


# --- 5. rank structure -------------------------------------------------------


def test_c5_pure_rank_one():
    bad, count, dependent = [], 0, 0
    for seed in range(120):
        rng = np.random.default_rng(50_000 + seed)
        n = int(rng.integers(2, 5))
        m = int(rng.integers(1, n + 3))
        dependent += m > n
        sol = solve(random_pure_ensemble(n, m, rng))
        # ranks on the span of the states; the lifted first outcome also
        # carries the projector onto the complement, where no state lives
        ranks = [numerical_rank(P, 1e-6) for P in sol.reduced_measurement]
        if max(ranks) > 1:
            bad.append(seed)
        count += 1
    assert record("C5 pure rank <= 1", not bad, f"{count} ensembles ({dependent} with m > n), {len(bad)} violations")


def test_c5_orthonormal_vectors():
    worst = 0.0
    for seed in range(100):
        rng = np.random.default_rng(51_000 + seed)
        n = int(rng.integers(2, 5))
        sol = solve(random_pure_ensemble(n, n, rng))
        M = np.column_stack(sol.measurement.vectors)
        worst = max(worst, np.max(np.abs(M.conj().T @ M - np.eye(n))))
    assert record("C5 orthonormal (m = n)", worst <= 1e-6, f"100 ensembles, max |<mu_i|mu_j> - d_ij| = {worst:.2e} (tol 1e-6)")


def test_c5_mixed_rank_bound():
    bad = []
    for seed in range(100):
        rng = np.random.default_rng(52_000 + seed)
        e = random_mixed_ensemble(int(rng.integers(2, 5)), int(rng.integers(2, 6)), rng)
        sol = solve(e)
        for P, rho in zip(sol.reduced_measurement, sol.reduced.states):
            if numerical_rank(P, 1e-6) > numerical_rank(rho, 1e-6):
                bad.append(seed)
    assert record("C5 mixed rank bound", not bad, f"100 ensembles, {len(bad)} violations of rank Pi_i <= rank rho_i")


# --- 6. exact cases ------------------------------------------------------------


def _unitary(n, rng):
    return np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))[0]


def test_c6_orthogonal_states():
    worst = 0.0
    for seed in range(30):
        rng = np.random.default_rng(60_000 + seed)
        n = int(rng.integers(2, 5))
        m = int(rng.integers(1, n + 1))
        U = _unitary(n, rng)
        priors = rng.dirichlet(np.ones(m))
        worst = max(worst, abs(solve(Ensemble.from_vectors(priors, list(U.T[:m]))).p_correct - 1))
    assert record("C6 orthogonal states", worst <= 1e-8, f"30 ensembles, max |P_d - 1| = {worst:.2e} (tol 1e-8)")


def test_c6_single_state():
    worst_pi = worst_x = 0.0
    for seed in range(20):
        rng = np.random.default_rng(61_000 + seed)
        n = int(rng.integers(1, 5))
        e = random_mixed_ensemble(n, 1, rng)
        sol = solve(e)
        worst_pi = max(worst_pi, np.max(np.abs(sol.measurement.operators[0] - np.eye(n))))
        worst_x = max(worst_x, np.max(np.abs(sol.X - e.weighted[0])))
    ok = worst_pi <= 1e-8 and worst_x <= 1e-8
    assert record("C6 single state", ok, f"max |Pi - I| = {worst_pi:.2e}, max |X - rho| = {worst_x:.2e} (tol 1e-8)")


def test_c6_duplicated_states():
    worst, lp = 0.0, 0
    cases = 0
    for seed in range(20):
        rng = np.random.default_rng(62_000 + seed)
        n = int(rng.integers(2, 5))
        vs = [random_unit_vector(n, rng) for _ in range(n)]
        vs.append(vs[seed % n])  # an exact repeat
        priors = np.full(n + 1, 1.0 / (n + 1))
        sol = solve(Ensemble.from_vectors(priors, vs))
        lp += sol.used_lp
        worst = max(worst, sol.report.gap)
        cases += 1
    ok = lp == cases and worst <= 1e-6
    assert record("C6 duplicated states", ok, f"{lp}/{cases} used the LP fallback, max gap {worst:.2e} (tol 1e-6)")


# --- 7. numerical self-checks ------------------------------------------------------


def test_c7_finite_differences():
    worst = 0.0
    h = 1e-6
    for seed in range(20):
        rng = np.random.default_rng(70_000 + seed)
        e = random_mixed_ensemble(int(rng.integers(2, 5)), int(rng.integers(1, 5)), rng)
        A = rng.standard_normal((e.dim, e.dim)) + 1j * rng.standard_normal((e.dim, e.dim))
        X = initial_point(e) + 0.1 * (A + A.conj().T)
        t = float(rng.uniform(0.5, 10))
        x0 = hvec(X)
        fd = np.array([
            (barrier_value(hmat(x0 + h * u), t, e) - barrier_value(hmat(x0 - h * u), t, e)) / (2 * h)
            for u in np.eye(x0.size)
        ])
        g = barrier_gradient(X, t, e)
        worst = max(worst, np.linalg.norm(fd - g) / np.linalg.norm(g))
        v = rng.standard_normal(x0.size)
        fdh = (barrier_gradient(hmat(x0 + h * v), t, e) - barrier_gradient(hmat(x0 - h * v), t, e)) / (2 * h)
        Hv = barrier_hessian_vector(X, t, e, v)
        worst = max(worst, np.linalg.norm(fdh - Hv) / np.linalg.norm(Hv))
    assert record("C7 finite differences", worst <= 1e-5, f"20 points, max relative error {worst:.2e} (tol 1e-5)")


def test_c7_simplex():
    worst, feasible, infeasible, wrong = 0.0, 0, 0, 0
    for seed in range(100):
        rng = np.random.default_rng(71_000 + seed)
        n = int(rng.integers(2, 9))
        m = int(rng.integers(1, n))
        A = rng.integers(-4, 5, size=(m, n)).astype(float)
        b = A @ rng.integers(0, 3, size=n) if seed % 2 == 0 else rng.integers(-5, 6, size=m).astype(float)
        c = rng.integers(0, 6, size=n).astype(float)
        oracle = brute_force_lp(c, A, b)
        try:
            res = simplex_lp(c, A, b)
        except InfeasibleError:
            infeasible += 1
            wrong += oracle is not None
            continue
        feasible += 1
        if oracle is None:
            wrong += 1
            continue
        worst = max(worst, abs(res.objective - oracle))
    ok = worst <= 1e-9 and not wrong
    assert record(
        "C7 simplex vs enumeration", ok, f"{feasible} solved, {infeasible} infeasible, {wrong} disagreements, max |dobj| = {worst:.1e} (tol 1e-9)"
    )


if __name__ == "__main__":
    tests = [f for name, f in sorted(globals().items()) if name.startswith("test_c")]
    failed = 0
    for f in tests:
        try:
            f()
        except AssertionError:
            failed += 1
    print(f"{len(tests) - failed}/{len(tests)} criteria passed")
    sys.exit(1 if failed else 0)
