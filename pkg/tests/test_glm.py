import numpy as np
import pytest
from scipy import special

from helpers import one_hot, oracle_power, random_markets
from oddsprob import glm
from oddsprob.errors import FitError, OddsDomainError
from oddsprob.glm import FittedModel, TrainingSet
from oddsprob.odds_core import MarketOdds, convert_multiplicative, convert_power
from oddsprob.synthetic import powerlaw_markets


def _fl(beta):
    return FittedModel("fl_glm", {"beta": float(beta)}, 0.0, 0)


def _data(n, exponents, seed=0):
    odds, outcomes = powerlaw_markets(n, exponents, seed=seed)
    return TrainingSet.from_odds(odds, outcomes, draw_index=1)


# -- TrainingSet --------------------------------------------------------------


def test_training_set_validation():
    inv = np.array([[0.5, 0.3, 0.25]])
    with pytest.raises(OddsDomainError):
        TrainingSet(inv, np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 0.0]]))
    with pytest.raises(OddsDomainError):
        TrainingSet(inv, np.array([[0.0, 0.0, 0.0]]))
    with pytest.raises(OddsDomainError):
        TrainingSet(np.array([[1.2, 0.3, 0.25]]), np.array([[1.0, 0.0, 0.0]]))
    with pytest.raises(OddsDomainError):
        TrainingSet(inv, np.array([[1.0, 0.0, 0.0]]), draw_index=3)
    with pytest.raises(OddsDomainError):
        TrainingSet(np.array([[0.5, 0.3, 0.25], [0.5, 0.3, 0.25]]),
                    np.array([[1.0, 0.0, 0.0], [1.0, 1.0, 0.0]]))


# -- prediction identities ----------------------------------------------------


def test_beta_one_is_multiplicative():
    market = MarketOdds([1.5, 3.0, 6.0])
    np.testing.assert_allclose(glm.predict_fl_glm(_fl(1.0), market).probs,
                               convert_multiplicative(market).probs, rtol=0, atol=1e-15)


def test_power_root_gives_unit_normaliser():
    odds = [1.5, 3.0, 6.0]
    _, beta = oracle_power(odds)
    assert glm.fl_glm_normaliser(odds, beta)[0] == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(glm.predict_fl_glm(_fl(beta), MarketOdds(odds)).probs,
                               convert_power(MarketOdds(odds)).probs, atol=1e-12)


def test_longshot_shrinks_above_beta_one():
    market = MarketOdds([1.8, 2.1, 50.0])
    pv = glm.predict_fl_glm(_fl(1.12), market)
    assert pv.probs[2] < convert_multiplicative(market).probs[2]
    assert pv.total == pytest.approx(1.0, abs=1e-12)


def test_intercept_form():
    beta = 1.13
    for odds in random_markets(1, 100):
        x = np.asarray(odds)
        exp_b0 = 1.0 / np.sum(x ** -beta)
        np.testing.assert_allclose(glm.predict_fl_glm(_fl(beta), MarketOdds(x)).probs,
                                   exp_b0 * x ** -beta, rtol=1e-13)


def test_multi_winner_prediction_sums_to_t():
    pv = _fl(1.1).predict_market(MarketOdds([1.3, 1.6, 2.5, 6.0], t=2))
    assert pv.total == pytest.approx(2.0, abs=1e-12)


def test_predict_fl_glm_rejects_other_kinds():
    with pytest.raises(OddsDomainError):
        glm.predict_fl_glm(FittedModel("multinomial_logistic", {"coef": np.zeros((3, 4))}, 0.0, 0),
                           MarketOdds([2.0, 3.0, 4.0]))


# -- likelihood ---------------------------------------------------------------


def test_gradient_matches_central_differences():
    data = _data(1000, [1.1] * 3, seed=4)
    rng = np.random.default_rng(5)
    for beta in rng.uniform(0.5, 2.5, 10):
        h = 1e-5
        fd = (glm.fl_glm_log_likelihood(data, beta + h) - glm.fl_glm_log_likelihood(data, beta - h)) / (2 * h)
        g = glm.fl_glm_gradient(data, beta)
        assert abs(g - fd) <= 1e-6 * max(1.0, abs(fd))


def test_hessian_matches_gradient_differences():
    data = _data(2000, [1.2, 1.0, 1.2], seed=6)
    ex = np.array([1.1, 0.95, 1.3])
    H = glm.powerlaw_hessian(data, ex)
    h = 1e-6
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        gp = glm.powerlaw_log_likelihood(data, ex + e)[1]
        gm = glm.powerlaw_log_likelihood(data, ex - e)[1]
        np.testing.assert_allclose(H[:, j], (gp - gm) / (2 * h), rtol=1e-5, atol=1e-4)


def test_likelihood_against_direct_formula():
    data = _data(500, [1.3] * 3, seed=8)
    beta = 1.21
    w = data.inverse_odds ** beta
    p = w / w.sum(axis=1, keepdims=True)
    direct = float((data.outcomes * np.log(p)).sum())
    ll, _, mean_norm = glm.powerlaw_log_likelihood(data, np.full(3, beta))
    assert ll == pytest.approx(direct, rel=1e-12)
    assert mean_norm == pytest.approx(w.sum(axis=1).mean(), rel=1e-12)


def test_golden_section_on_parabola():
    x, evals = glm.golden_section_max(lambda b: -(b - 1.234567) ** 2, 0.25, 4.0, 1e-9)
    assert x == pytest.approx(1.234567, abs=1e-8)
    assert evals < 100


# -- fitting ------------------------------------------------------------------


@pytest.mark.parametrize("beta", [1.0, 1.5])
def test_fl_glm_recovers_beta(beta):
    model = glm.fit_fl_glm(_data(50_000, [beta] * 3, seed=int(beta * 10)))
    assert model.params["beta"] == pytest.approx(beta, abs=0.04)
    assert np.isfinite(model.log_likelihood) and model.mean_normaliser > 0


def test_fl_glm_is_local_maximum():
    data = _data(5000, [1.1] * 3, seed=9)
    model = glm.fit_fl_glm(data)
    b = model.params["beta"]
    ll = glm.fl_glm_log_likelihood(data, b)
    assert ll > glm.fl_glm_log_likelihood(data, b + 1e-4)
    assert ll > glm.fl_glm_log_likelihood(data, b - 1e-4)


def test_gradient_mode_agrees_with_golden():
    data = _data(5000, [1.2] * 3, seed=10)
    a = glm.fit_fl_glm(data).params["beta"]
    b = glm.fit_fl_glm(data, optimizer="gradient").params["beta"]
    assert a == pytest.approx(b, abs=1e-6)


def test_consistency_with_growing_n():
    errs = []
    for n in (1_000, 10_000, 100_000):
        fits = [glm.fit_fl_glm(_data(n, [1.2] * 3, seed=s)).params["beta"] for s in range(3)]
        errs.append(np.mean(np.abs(np.array(fits) - 1.2)))
    assert errs[0] > errs[1] > errs[2]


def test_two_beta_recovery_and_nesting():
    model = glm.fit_fl_glm_two_beta(_data(60_000, [1.2, 1.0, 1.2], seed=11))
    assert model.params["beta_decisive"] == pytest.approx(1.2, abs=0.05)
    assert model.params["beta_draw"] == pytest.approx(1.0, abs=0.05)
    nested = glm.fit_fl_glm_two_beta(_data(60_000, [1.1] * 3, seed=12))
    assert nested.params["beta_decisive"] == pytest.approx(nested.params["beta_draw"], abs=0.08)


def test_two_beta_optimisers_agree_on_small_data():
    data = _data(3000, [1.2, 1.0, 1.2], seed=13)
    a = glm.fit_fl_glm_two_beta(data)
    b = glm.fit_fl_glm_two_beta(data, optimizer="coordinate", tol=1e-7)
    assert a.params["beta_decisive"] == pytest.approx(b.params["beta_decisive"], abs=2e-3)
    assert a.params["beta_draw"] == pytest.approx(b.params["beta_draw"], abs=2e-3)
    assert a.log_likelihood >= b.log_likelihood - 1e-6


def test_two_beta_needs_draw_index():
    odds, y = powerlaw_markets(100, [1.1] * 3)
    with pytest.raises(OddsDomainError):
        glm.fit_fl_glm_two_beta(TrainingSet.from_odds(odds, y))


def test_fit_error_carries_beta():
    data = _data(200, [1.1] * 3)
    with pytest.raises(FitError) as err:
        glm.fit_fl_glm(data, optimizer="gradient", learning_rate=1e6)
    assert err.value.parameter is not None


# -- logistic baselines -------------------------------------------------------


def _irls_softmax(X, y, k, l2=glm.L2_PENALTY, iters=100):
    """Newton-Raphson on the stacked softmax log-likelihood, class 0 pinned."""
    n, d = X.shape
    K = k - 1
    Y = one_hot(y, k)[:, 1:]
    w = np.zeros(K * d)
    for _ in range(iters):
        W = np.vstack([np.zeros(d), w.reshape(K, d)])
        P = special.softmax(X @ W.T, axis=1)[:, 1:]
        g = ((Y - P).T @ X).ravel() - l2 * w
        H = np.zeros((K * d, K * d))
        for i in range(n):
            S = np.diag(P[i]) - np.outer(P[i], P[i])
            H += np.kron(S, np.outer(X[i], X[i]))
        H += l2 * np.eye(K * d)
        step = np.linalg.solve(H, g)
        w = w + step
        if np.abs(step).max() < 1e-12:
            break
    return np.vstack([np.zeros(d), w.reshape(K, d)])


def test_multinomial_matches_irls_small():
    inv = np.array([
        [0.50, 0.30, 0.25],
        [0.40, 0.32, 0.33],
        [0.60, 0.25, 0.20],
        [0.30, 0.30, 0.45],
        [0.45, 0.28, 0.30],
        [0.35, 0.33, 0.36],
    ])
    y = np.array([0, 0, 1, 2, 2, 1])
    X = np.column_stack([np.ones(6), inv])
    coef, ll, _ = glm.multinomial_logistic_mle(X, y, 3)
    oracle = _irls_softmax(X, y, 3)
    P_ours = special.softmax(X @ coef.T, axis=1)
    P_oracle = special.softmax(X @ oracle.T, axis=1)
    np.testing.assert_allclose(P_ours, P_oracle, atol=1e-6)
    np.testing.assert_allclose(coef, oracle, rtol=1e-4, atol=1e-4)


def test_multinomial_matches_irls_medium():
    odds, y = powerlaw_markets(400, [1.1] * 3, seed=14)
    inv = 1.0 / odds
    X = np.column_stack([np.ones(400), inv])
    coef, _, _ = glm.multinomial_logistic_mle(X, y.argmax(axis=1), 3)
    P = special.softmax(X @ coef.T, axis=1)
    P_oracle = special.softmax(X @ _irls_softmax(X, y.argmax(axis=1), 3).T, axis=1)
    np.testing.assert_allclose(P, P_oracle, atol=1e-6)


def test_multinomial_constant_data_concentrates():
    inv = np.tile([0.5, 0.3, 0.25], (20, 1))
    data = TrainingSet(inv, np.tile([1.0, 0.0, 0.0], (20, 1)))
    model = glm.fit_multinomial_logistic(data)
    assert model.predict_inverse(inv[:1])[0, 0] > 0.999


def test_ordered_matches_statsmodels():
    from statsmodels.miscmodels.ordinal_model import OrderedModel

    odds, y = powerlaw_markets(3000, [1.1] * 3, seed=15)
    inv = 1.0 / odds
    labels = 2 - y.argmax(axis=1)
    w, theta, ll, _ = glm.ordered_logistic_mle(inv, labels, 3, l2=0.0)
    res = OrderedModel(labels, inv, distr="logit").fit(method="newton", disp=False, maxiter=200)
    assert ll == pytest.approx(res.llf, abs=1e-6)
    ours = glm._ordered_probs(inv, w, theta)
    np.testing.assert_allclose(ours, res.predict(), atol=1e-6)
    assert np.all(np.diff(theta) > 0)


def test_ordered_separable_threshold_at_midpoint():
    x = np.array([[0.0]] * 10 + [[1.0]] * 10)
    labels = np.array([0] * 10 + [1] * 10)
    w, theta, _, _ = glm.ordered_logistic_mle(x, labels, 2)
    assert w[0] > 5
    assert theta[0] / w[0] == pytest.approx(0.5, abs=0.01)


def test_logistic_predictions_are_valid():
    data = _data(2000, [1.1] * 3, seed=16)
    for kind in ("multinomial_logistic", "ordered_logistic"):
        P = glm.fit_model(kind, data).predict_inverse(data.inverse_odds)
        np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)
        assert ((P > 0) & (P < 1)).all()


def test_ordered_descending_order():
    # home-heavy outcomes should put most mass on column 0
    odds, y = powerlaw_markets(3000, [1.1] * 3, seed=17)
    model = glm.fit_ordered_logistic(TrainingSet.from_odds(odds, y))
    P = model.predict_inverse(1.0 / odds)
    np.testing.assert_allclose(P.mean(axis=0), y.mean(axis=0), atol=0.02)


# -- serialisation ------------------------------------------------------------


@pytest.mark.parametrize("kind", glm.KINDS)
def test_model_text_round_trip(kind, tmp_path):
    data = _data(1500, [1.2, 1.0, 1.2], seed=18)
    model = glm.fit_model(kind, data)
    path = tmp_path / "m.model"
    model.save(path)
    back = FittedModel.load(path)
    assert back.kind == kind and back.n_obs == model.n_obs
    assert back.log_likelihood == model.log_likelihood
    np.testing.assert_array_equal(back.predict_inverse(data.inverse_odds[:50]),
                                  model.predict_inverse(data.inverse_odds[:50]))
    assert back.to_text() == model.to_text()


def test_model_text_rejects_bad_version():
    text = _fl(1.1).to_text().replace("format_version = 1", "format_version = 9")
    with pytest.raises(OddsDomainError):
        FittedModel.from_text(text)


def test_unknown_kind():
    with pytest.raises(OddsDomainError):
        glm.fit_model("probit", _data(50, [1.0] * 3))
