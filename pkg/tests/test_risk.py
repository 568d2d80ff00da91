import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ordembed import risk
from ordembed.risk import ConstraintSet, EmpiricalObjective, LossKind
from ordembed.triplets import Dataset, enumerate_triplets, logistic_link, noiseless_link, simulate
from conftest import random_gram

seeds = st.integers(0, 2**32 - 1)


def constrained_gram(n, d, gamma, rng):
    """Random rank-d centered Gram matrix scaled into the gamma box (trace <= n gamma)."""
    G = random_gram(n, d, rng)
    return G * (gamma * rng.uniform(0.05, 1.0) / np.abs(G).max())


def test_loss_values():
    assert risk.loss_value("zero_one", 0.0) == 1.0
    assert risk.loss_value("zero_one", 1e-12) == 0.0
    assert risk.loss_value("hinge", 0.25) == 0.75
    assert risk.loss_value("hinge", 2.0) == 0.0
    assert risk.loss_value(LossKind.LOGISTIC, 0.0) == pytest.approx(np.log(2))
    assert risk.loss_value("logistic", -3.0) == pytest.approx(3.048587351573742, rel=1e-14)
    assert risk.loss_value("logistic", 3.0) == pytest.approx(0.04858735157374206, rel=1e-14)
    assert np.isfinite(risk.loss_value("logistic", -800.0))
    assert risk.loss_value("logistic", -800.0) == pytest.approx(800.0)


def test_loss_derivatives():
    z = np.linspace(-4, 4, 17)
    h = 1e-6
    num = (risk.loss_value("logistic", z + h) - risk.loss_value("logistic", z - h)) / (2 * h)
    np.testing.assert_allclose(risk.loss_derivative("logistic", z), num, rtol=1e-7)
    np.testing.assert_array_equal(risk.loss_derivative("hinge", [0.0, 1.0, 2.0]), [-1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        risk.loss_derivative("zero_one", 0.0)


def test_empirical_risk_examples():
    G = np.array([[1.0, 0, -1], [0, 0, 0], [-1, 0, 1]])
    data = Dataset(3, [[0, 1, 2]], [-1])
    # margin = -1 * (1 - 4) = 3
    assert risk.empirical_risk(data, G) == pytest.approx(0.04858735157374206)
    assert risk.empirical_risk(data, np.zeros((3, 3))) == pytest.approx(np.log(2))
    with pytest.raises(ValueError):
        risk.empirical_risk(Dataset(3, np.zeros((0, 3)), []), G)


def test_gradient_at_zero_matches_closed_form():
    data = Dataset(4, [[0, 1, 2], [3, 0, 1]], [1, -1])
    grad = risk.empirical_risk_gradient(data, np.zeros((4, 4)))
    # at G = 0 the logistic derivative is -1/2, so grad = -1/(2m) sum y_t L_t
    from ordembed.triplets import lt_matrix
    expected = -(lt_matrix((0, 1, 2), 4) - lt_matrix((3, 0, 1), 4)) / 4
    np.testing.assert_allclose(grad, expected)


@settings(max_examples=25, deadline=None)
@given(seeds, st.sampled_from(["logistic", "hinge"]))
def test_objective_matches_plain_risk(seed, kind):
    rng = np.random.default_rng(seed)
    n = 6
    G = random_gram(n, 2, rng)
    # small n forces many duplicate triplets
    data = simulate(G, 300, logistic_link(), rng)
    H = random_gram(n, 2, rng)
    obj = EmpiricalObjective(data, kind)
    v, g = obj.value_and_grad(H)
    assert v == pytest.approx(risk.empirical_risk(data, H, kind), rel=1e-12)
    np.testing.assert_allclose(g, risk.empirical_risk_gradient(data, H, kind), atol=1e-14)
    assert obj.weights.sum() == pytest.approx(1.0)
    assert len(obj.y) < len(data)


def test_true_risk_and_bayes():
    n = 5
    G = random_gram(n, 2, np.random.default_rng(0))
    link = logistic_link()
    T, p = risk.label_probabilities(G, link)
    assert len(T) == 30 and ((p >= 0) & (p <= 1)).all()
    assert risk.bayes_error(np.zeros((n, n)), link) == 0.5
    assert risk.bayes_error(G, noiseless_link()) == 0.0
    assert 0 < risk.bayes_error(G, link) < 0.5
    # the NLL is the logistic loss for the logistic link
    assert risk.nll_risk(G, G, link) == pytest.approx(risk.true_risk(G, G, link), rel=1e-12)


def test_true_risk_minimized_at_truth():
    rng = np.random.default_rng(3)
    link = logistic_link()
    G = random_gram(6, 2, rng)
    base = risk.nll_risk(G, G, link)
    for _ in range(20):
        assert risk.nll_risk(random_gram(6, 2, rng), G, link) >= base - 1e-12


def test_nll_loss_values():
    link = logistic_link()
    assert risk.nll_loss(link, -1, -3.0) == pytest.approx(0.04858735157374206, rel=1e-14)
    assert risk.nll_loss(link, 1, -3.0) == pytest.approx(3.048587351573742, rel=1e-14)
    assert np.isfinite(risk.nll_loss(noiseless_link(), 1, -1.0))


def test_constraint_set():
    c = ConstraintSet(lam=2.0, gamma=1.0)
    assert c.contains(np.eye(2))
    assert not c.contains(np.diag([1.0, 1.5]))
    assert not c.contains(np.diag([1.0, -0.5]))
    assert not c.contains(3 * np.eye(1) / 2)
    with pytest.raises(ValueError):
        ConstraintSet(lam=0.0, gamma=1.0)


def test_logistic_cf_is_min_derivative():
    gamma = 0.5
    xs = np.linspace(-6 * gamma, 6 * gamma, 10001)
    assert risk.logistic_cf(gamma) <= np.abs(logistic_link().f_deriv(xs)).min()
    assert risk.logistic_cf(0.0) == 0.25


def test_gap_is_zero_at_truth():
    rng = np.random.default_rng(4)
    G = constrained_gram(8, 2, 1.0, rng)
    rep = risk.excess_risk_gap(G, G, logistic_link(), ConstraintSet(8.0, 1.0))
    assert rep.lhs == 0.0 and abs(rep.rhs) <= 1e-15 and rep.holds


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from([0.25, 0.5, 1.0]))
def test_gap_inequality_property(seed, gamma):
    rng = np.random.default_rng(seed)
    n = 6
    cs = ConstraintSet(lam=n * gamma, gamma=gamma)
    G, Gs = constrained_gram(n, 2, gamma, rng), constrained_gram(n, 2, gamma, rng)
    assert cs.contains(G) and cs.contains(Gs)
    rep = risk.excess_risk_gap(G, Gs, logistic_link(), cs)
    assert rep.holds
    assert rep.cf <= rep.cf_sampled + 1e-15


def test_prediction_error_examples():
    G = np.array([[1.0, 0, -1], [0, 0, 0], [-1, 0, 1]])
    holdout = Dataset(3, [[0, 1, 2], [2, 0, 1]], [-1, 1])
    assert risk.prediction_error(G, holdout) == 0.0
    # every margin is 0 under G = 0, and ties count as errors
    assert risk.prediction_error(np.zeros((3, 3)), holdout) == 1.0
    with pytest.raises(ValueError):
        risk.prediction_error(G, Dataset(3, np.zeros((0, 3)), []))


def test_prediction_error_unrelated_gram_is_chance():
    rng = np.random.default_rng(8)
    n = 20
    truth = random_gram(n, 2, rng)
    holdout = simulate(truth, 20_000, noiseless_link(), rng)
    assert risk.prediction_error(random_gram(n, 2, rng), holdout) == pytest.approx(0.5, abs=0.05)
    assert risk.prediction_error(truth, holdout) == 0.0


def test_bayes_error_by_enumeration():
    G = random_gram(4, 1, np.random.default_rng(1))
    T = enumerate_triplets(4)
    from ordembed.triplets import lt_apply
    p = 1 / (1 + np.exp(lt_apply(T, G)))
    assert risk.bayes_error(G, logistic_link()) == pytest.approx(np.minimum(p, 1 - p).mean(), rel=1e-12)
