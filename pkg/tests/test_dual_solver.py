import math

import numpy as np
import pytest
from scipy.optimize import brentq

from conftest import EX_X_HAT
from qdetect.certify import helstrom_binary_pd, prob_correct
from qdetect.dual_solver import (
    DualCertificate,
    MaxIterationsError,
    SolverOptions,
    barrier_gradient,
    barrier_hessian,
    barrier_hessian_vector,
    barrier_value,
    initial_point,
    newton_step,
    solve_dual,
)
from qdetect.ensemble import Ensemble
from qdetect.generate import random_mixed_ensemble, random_pure_ensemble
from qdetect.linalg import hmat, hvec, inv_sqrt_psd


def random_povm(n, m, rng):
    A = []
    for _ in range(m):
        G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        A.append(G @ G.conj().T)
    R = inv_sqrt_psd(sum(A))
    return [R @ a @ R for a in A]


# --- initial point ----------------------------------------------------------


def test_initial_point_worked_example(example):
    top = max(np.linalg.eigvalsh(r)[-1] for r in example.weighted)
    assert top == pytest.approx(0.6)
    np.testing.assert_allclose(initial_point(example), 1.6 * np.eye(2), atol=1e-14)


def test_initial_point_single_mixed_state():
    e = Ensemble([1.0], (np.eye(2) / 2,))
    np.testing.assert_allclose(initial_point(e), 1.5 * np.eye(2))


@pytest.mark.parametrize("seed", range(10))
def test_initial_point_strictly_feasible(seed):
    e = random_mixed_ensemble(3, 4, seed)
    X0 = initial_point(e)
    for r in e.weighted:
        assert np.linalg.eigvalsh(X0 - r)[0] >= 1 - 1e-8


# --- solve -------------------------------------------------------------------


def test_solve_worked_example(example):
    cert, trace = solve_dual(example)
    assert np.max(np.abs(cert.X - EX_X_HAT)) <= 2e-3
    assert cert.bound <= 1e-8
    assert trace.records[-1].t >= example.m * example.dim / 1e-8


def test_solve_single_state():
    rho = np.array([[0.7, 0.2j], [-0.2j, 0.3]])
    e = Ensemble([1.0], (rho,))
    cert, _ = solve_dual(e)
    assert np.max(np.abs(cert.X - rho)) <= 1e-8
    assert cert.objective == pytest.approx(1.0, abs=1e-8)


def test_solve_orthogonal_pair(orthogonal_pair):
    cert, _ = solve_dual(orthogonal_pair)
    assert np.max(np.abs(cert.X - 0.5 * np.eye(2))) <= 1e-8
    assert cert.objective == pytest.approx(1.0, abs=1e-8)


def test_solve_zero_plus(zero_plus):
    cert, _ = solve_dual(zero_plus)
    expected = (1 + math.sqrt(1 - 0.5)) / 2
    assert expected == pytest.approx(0.85355339, abs=1e-8)
    assert abs(cert.objective - expected) <= 1e-8


@pytest.mark.parametrize("seed", range(20))
def test_certificate_matches_helstrom(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    e = random_pure_ensemble(n, 2, rng) if seed % 2 else random_mixed_ensemble(n, 2, rng)
    cert, _ = solve_dual(e)
    assert 0 <= cert.objective - helstrom_binary_pd(e) <= 1e-8


@pytest.mark.parametrize("seed", range(10))
def test_path_is_feasible_and_monotone(seed):
    e = random_mixed_ensemble(3, 3, seed)
    opts = SolverOptions()
    _, trace = solve_dual(e, opts)
    objs = [r.objective for r in trace.records]
    assert all(r.min_slack > 0 for r in trace.records)
    assert all(b <= a + opts.gap_tol for a, b in zip(objs, objs[1:]))
    assert all(b > a for a, b in zip([r.t for r in trace.records], [r.t for r in trace.records][1:]))


@pytest.mark.parametrize("seed", range(10))
def test_weak_duality(seed):
    rng = np.random.default_rng(seed)
    e = random_mixed_ensemble(3, 4, rng)
    tol = 1e-8
    iterates = [initial_point(e)] + [solve_dual(e, SolverOptions(gap_tol=g))[0].X for g in (1e-1, 1e-4, 1e-8)]
    for _ in range(5):
        povm = random_povm(3, 4, rng)
        pd = prob_correct(e, povm)
        for X in iterates:
            assert np.trace(X).real >= pd - e.m * e.dim * tol


def test_certificate_is_positive_definite_and_feasible(example):
    cert, _ = solve_dual(example)
    assert np.linalg.eigvalsh(cert.X)[0] > 0
    assert cert.is_feasible(example)
    assert cert.min_slack(example) > 0


def test_iteration_budget_exhausted(example):
    with pytest.raises(MaxIterationsError) as info:
        solve_dual(example, SolverOptions(max_newton_iters=1))
    assert info.value.X is not None
    assert info.value.bound > 0


@pytest.mark.parametrize(
    "kwargs",
    [dict(gap_tol=0), dict(barrier_growth=1.0), dict(shrink=1.0), dict(acceptance=0.5), dict(max_newton_iters=0)],
)
def test_options_validated(kwargs):
    with pytest.raises(ValueError):
        SolverOptions(**kwargs)


def test_trace_serializes(example):
    _, trace = solve_dual(example)
    rows = trace.to_list()
    assert set(rows[0]) == {"t", "objective", "newton_iters", "decrement", "min_slack"}


# --- Newton step ---------------------------------------------------------------


@pytest.mark.parametrize("t", [1.0, 10.0, 1000.0])
def test_decrement_vanishes_on_central_path(orthogonal_pair, t):
    # diagonal entries solve t = 1/(d - 1/2) + 1/d on each axis
    d = brentq(lambda x: 1 / (x - 0.5) + 1 / x - t, 0.5 + 1e-15, 10.0, xtol=1e-15, rtol=1e-15)
    X = d * np.eye(2, dtype=complex)
    _, dec = newton_step(X, t, orthogonal_pair)
    assert dec <= 1e-8


def test_scalar_newton_at_minimizer():
    stub = Ensemble([1.0], (np.zeros((1, 1)),))
    D, dec = newton_step(np.eye(1, dtype=complex), 1.0, stub)
    assert abs(D[0, 0]) <= 1e-15 and dec <= 1e-15


def test_scalar_newton_direction():
    # f(x) = t x - ln x: Newton step is -(t - 1/x) / (1/x^2)
    stub = Ensemble([1.0], (np.zeros((1, 1)),))
    x, t = 0.3, 2.0
    D, dec = newton_step(np.array([[x]], dtype=complex), t, stub)
    g, h = t - 1 / x, 1 / x**2
    assert D[0, 0].real == pytest.approx(-g / h, rel=1e-12)
    assert dec == pytest.approx(abs(g) / math.sqrt(h), rel=1e-12)


def _feasible_point(e, rng):
    X = initial_point(e)
    A = rng.standard_normal((e.dim, e.dim)) + 1j * rng.standard_normal((e.dim, e.dim))
    return X + 0.1 * (A + A.conj().T)


@pytest.mark.parametrize("seed", range(5))
def test_gradient_finite_differences(seed):
    rng = np.random.default_rng(seed)
    e = random_mixed_ensemble(3, 2, rng)
    X, t = _feasible_point(e, rng), 3.7
    x0 = hvec(X)
    h = 1e-6
    fd = np.array([
        (barrier_value(hmat(x0 + h * u), t, e) - barrier_value(hmat(x0 - h * u), t, e)) / (2 * h)
        for u in np.eye(x0.size)
    ])
    g = barrier_gradient(X, t, e)
    assert np.linalg.norm(fd - g) <= 1e-5 * np.linalg.norm(g)


@pytest.mark.parametrize("seed", range(5))
def test_hessian_vector_finite_differences(seed):
    rng = np.random.default_rng(seed)
    e = random_mixed_ensemble(3, 2, rng)
    X, t = _feasible_point(e, rng), 3.7
    x0 = hvec(X)
    v = rng.standard_normal(x0.size)
    h = 1e-6
    fd = (barrier_gradient(hmat(x0 + h * v), t, e) - barrier_gradient(hmat(x0 - h * v), t, e)) / (2 * h)
    Hv = barrier_hessian(X, t, e) @ v
    assert np.linalg.norm(fd - Hv) <= 1e-5 * np.linalg.norm(Hv)
    np.testing.assert_allclose(barrier_hessian_vector(X, t, e, v), Hv, rtol=1e-10, atol=1e-12)


def test_newton_direction_solves_system():
    rng = np.random.default_rng(3)
    e = random_mixed_ensemble(3, 2, rng)
    X = _feasible_point(e, rng)
    D, dec = newton_step(X, 2.0, e)
    H, g = barrier_hessian(X, 2.0, e), barrier_gradient(X, 2.0, e)
    np.testing.assert_allclose(H @ hvec(D), -g, atol=1e-10)
    assert dec == pytest.approx(math.sqrt(hvec(D) @ H @ hvec(D)), rel=1e-10)


def test_barrier_infinite_outside_domain(example):
    assert barrier_value(np.zeros((2, 2)), 1.0, example) == math.inf


def test_certificate_objective():
    c = DualCertificate(np.diag([0.25, 0.5]))
    assert c.objective == 0.75
