import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ordembed import experiment, risk, solvers
from ordembed.solvers import (
    NumericalFailure, SolverConfig, debias, factored_gd, nuclear_pgd, pgd, project_nuclear_ball_psd,
    project_psd, project_rank_d, rank_d_pgd, simplex_cap_projection, solve,
)
from ordembed.triplets import logistic_link, noiseless_link, simulate
from conftest import random_gram

seeds = st.integers(0, 2**32 - 1)


def sym_matrices(n):
    return st.lists(st.floats(-5, 5), min_size=n * n, max_size=n * n).map(
        lambda v: (lambda A: A + A.T)(np.array(v).reshape(n, n)))


@pytest.fixture
def problem():
    rng = np.random.default_rng(12)
    G = random_gram(10, 2, rng)
    return G, simulate(G, 600, logistic_link(), rng)


def test_solver_config_validation():
    for bad in ({"max_iters": 0}, {"initial_step": 0.0}, {"rel_tol": -1.0},
                {"backtracking_shrink": 1.0}, {"armijo_constant": 0.0}):
        with pytest.raises(ValueError):
            SolverConfig(**bad)


def test_project_psd_examples():
    np.testing.assert_allclose(project_psd(np.diag([2.0, -1.0])), np.diag([2.0, 0.0]))
    G = random_gram(6, 3, np.random.default_rng(0))
    np.testing.assert_allclose(project_psd(G), G, atol=1e-12)


def test_project_rank_d_examples():
    M = np.diag([3.0, 1.0, -0.5])
    np.testing.assert_allclose(project_rank_d(M, 1), np.diag([3.0, 0, 0]), atol=1e-15)
    np.testing.assert_allclose(project_rank_d(M, 3), np.diag([3.0, 1, 0]), atol=1e-15)
    G = random_gram(5, 5, np.random.default_rng(1))
    np.testing.assert_allclose(project_rank_d(G, 5), G, atol=1e-12)
    with pytest.raises(ValueError):
        project_rank_d(M, 0)


def test_simplex_cap_examples():
    np.testing.assert_allclose(simplex_cap_projection([3.0, 1.0], 2.0), [2.0, 0.0])
    np.testing.assert_array_equal(simplex_cap_projection([0.5, 0.5], 2.0), [0.5, 0.5])
    np.testing.assert_allclose(simplex_cap_projection([2.0, 2.0, -1.0], 1.0), [0.5, 0.5, 0.0])
    with pytest.raises(ValueError):
        simplex_cap_projection([1.0], 0.0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=12), st.floats(0.01, 20))
def test_simplex_cap_properties(v, lam):
    v = np.array(v)
    s = simplex_cap_projection(v, lam)
    assert (s >= 0).all()
    assert s.sum() == pytest.approx(min(lam, np.maximum(v, 0).sum()), rel=1e-9, abs=1e-12)
    # KKT: the projection is no farther from v than any random feasible point
    rng = np.random.default_rng(0)
    for _ in range(20):
        q = rng.dirichlet(np.ones(len(v))) * lam * rng.uniform()
        assert np.linalg.norm(s - v) <= np.linalg.norm(q - v) + 1e-9


def test_project_nuclear_examples():
    np.testing.assert_allclose(project_nuclear_ball_psd(np.diag([3.0, 1.0]), 2.0), np.diag([2.0, 0.0]))
    G = random_gram(6, 2, np.random.default_rng(2))
    lam = np.trace(G) * 1.5
    np.testing.assert_allclose(project_nuclear_ball_psd(G, lam), G, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(sym_matrices(4), st.floats(0.1, 10), st.integers(1, 4))
def test_projections_feasible_and_idempotent(M, lam, d):
    P = project_nuclear_ball_psd(M, lam)
    w = np.linalg.eigvalsh(P)
    assert w.min() >= -1e-10 and w.clip(min=0).sum() <= lam * (1 + 1e-9)
    np.testing.assert_allclose(project_nuclear_ball_psd(P, lam), P, atol=1e-12 * max(1, lam))
    R = project_rank_d(M, d)
    w = np.linalg.eigvalsh(R)
    assert w.min() >= -1e-10 and (w > 1e-9 * max(1, abs(w).max())).sum() <= d
    np.testing.assert_allclose(project_rank_d(R, d), R, atol=1e-12 * max(1, np.abs(M).max()))


def test_pgd_descends_on_noiseless_instance():
    rng = np.random.default_rng(3)
    G = random_gram(8, 1, rng)
    data = simulate(G, 200, noiseless_link(), rng)
    res = rank_d_pgd(data, 1, SolverConfig(max_iters=200))
    assert res.objective_trace[0] == pytest.approx(np.log(2))
    assert risk.empirical_risk(data, res.G_hat) < np.log(2)


@pytest.mark.parametrize("name", ["rank_d_pgd", "nuclear_pgd", "factored_gd"])
def test_traces_monotone_and_feasible(problem, name):
    G, data = problem
    lam = float(np.trace(G))
    res = solve(name, data, 2, lam)
    trace = np.array(res.objective_trace)
    assert (np.diff(trace) < 0).all()
    w = np.linalg.eigvalsh(res.G_hat)
    assert w.min() >= -1e-10 * w.max()
    if name == "rank_d_pgd":
        assert (w > 1e-9 * w.max()).sum() <= 2
    if name == "nuclear_pgd":
        assert w.clip(min=0).sum() <= lam * (1 + 1e-9)


def test_convergence_flag_and_tolerance(problem):
    _, data = problem
    loose = rank_d_pgd(data, 2, SolverConfig(rel_tol=1e-4))
    tight = rank_d_pgd(data, 2, SolverConfig(rel_tol=1e-9))
    assert loose.converged and tight.iterations >= loose.iterations
    assert tight.objective_trace[-1] <= loose.objective_trace[-1]
    capped = rank_d_pgd(data, 2, SolverConfig(max_iters=2, rel_tol=0.0))
    assert capped.iterations == 2 and not capped.converged


def test_determinism(problem):
    _, data = problem
    a = factored_gd(data, 2, SolverConfig(seed=5))
    b = factored_gd(data, 2, SolverConfig(seed=5))
    assert a.objective_trace == b.objective_trace
    np.testing.assert_array_equal(a.G_hat, b.G_hat)
    assert rank_d_pgd(data, 2).objective_trace == rank_d_pgd(data, 2).objective_trace


def test_numerical_failure_reports_iteration(problem):
    _, data = problem
    G0 = np.zeros((data.n, data.n))
    G0[0, 0] = np.inf
    with pytest.raises(NumericalFailure) as exc:
        pgd(data, lambda M: M, G0=G0)
    assert exc.value.iteration == 0


def test_debias_fixed_point_and_decrease(problem):
    _, data = problem
    base = rank_d_pgd(data, 2, SolverConfig(rel_tol=1e-12, max_iters=5000))
    again = debias(base.G_hat, 2, data, SolverConfig(rel_tol=1e-12))
    np.testing.assert_allclose(np.sort(again.coefficients), np.linalg.eigvalsh(base.G_hat)[-2:], atol=1e-6)

    nuc = nuclear_pgd(data, 0.5 * np.trace(problem[0]))
    deb = debias(nuc.G_hat, 2, data)
    assert risk.empirical_risk(data, deb.G_hat) <= risk.empirical_risk(data, nuc.G_hat) + 1e-12
    assert (deb.coefficients >= 0).all()


def test_debias_warns_on_low_rank_input(problem):
    _, data = problem
    G1 = np.zeros((data.n, data.n))
    G1[0, 0], G1[1, 1] = 1.0, -1.0
    G1 = project_psd(G1)
    with pytest.warns(RuntimeWarning):
        debias(G1, 2, data)


def test_solve_dispatch(problem):
    _, data = problem
    with pytest.raises(ValueError):
        solve("nuclear_pgd", data, 2)
    with pytest.raises(ValueError):
        solve("sgd", data, 2)
    res = solve("nuclear_pgd_debiased", data, 2, 1.0)
    assert res.coefficients.shape == (2,)


def test_pgd_close_to_bayes_error_n16():
    n, d = 16, 2
    cfg = experiment.ExperimentConfig(n=n, d=d, sample_grid=[round(10 * experiment.dnlogn(n, d))],
                                      trials=10, solvers=["rank_d_pgd", "nuclear_pgd"])
    rows = experiment.run_sweep(cfg)
    bayes = {t: experiment.trial_truth(cfg, t).bayes_error for t in range(cfg.trials)}
    for name in cfg.solvers:
        excess = [r.pred_err - bayes[r.trial] for r in rows if r.solver == name]
        assert abs(np.median(excess)) <= 0.05


def test_noiseless_error_monotone_in_samples():
    cfg = experiment.ExperimentConfig(n=16, d=2, sample_grid=[100, 400, 1600], trials=10, link="noiseless",
                                      solvers=["rank_d_pgd"], holdout_size=5000,
                                      solver=SolverConfig(max_iters=300))
    med = [r["pred_err_median"] for r in experiment.summarize(experiment.run_sweep(cfg))]
    assert all(b <= a for a, b in zip(med, med[1:]))
    # large |S| with deterministic labels
    assert med[-1] < 0.01


@pytest.mark.slow
def test_debiased_tracks_rank_d_n64():
    n, d = 64, 2
    cfg = experiment.ExperimentConfig(n=n, d=d, sample_grid=[round(10 * experiment.dnlogn(n, d))],
                                      trials=10, solvers=["rank_d_pgd", "nuclear_pgd_debiased"],
                                      holdout_size=2000)
    summary = {r["solver"]: r for r in experiment.summarize(experiment.run_sweep(cfg))}
    ratio = summary["nuclear_pgd_debiased"]["frob_err_median"] / summary["rank_d_pgd"]["frob_err_median"]
    assert 0.8 <= ratio <= 1.25
