import math

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from hashtag_dynamics.mixture import (ClassLabel, LabelRule, MixtureModel, adjusted_rand_index,
                                      bic, classify, classify_points, cross_validate, em_fit,
                                      is_monotone, label_components, read_assignments, read_model,
                                      select_model, write_assignments, write_model)
from oracles import best_two_partition


def two_gaussians(seed, n=200, sigma=0.03):
    rng = np.random.default_rng(seed)
    a = rng.normal((0.10, 0.10), sigma, (n, 2))
    b = rng.normal((0.60, 0.20), sigma, (n, 2))
    return np.vstack([a, b]), np.repeat([0, 1], n)


def model_with_means(means):
    means = np.asarray(means, dtype=float)
    K = len(means)
    return MixtureModel(np.full(K, 1 / K), means, np.full((K, 2), 0.01), 0.0, 100)


def test_single_component_closed_form(rng):
    X = rng.uniform(0, 1, (150, 2))
    m = em_fit(X, 1)
    assert np.allclose(m.means[0], X.mean(axis=0))
    assert np.allclose(m.variances[0], X.var(axis=0))
    assert m.weights[0] == 1.0


def test_identical_points_floor():
    X = np.tile([0.3, 0.4], (20, 1))
    m = em_fit(X, 1)
    assert np.allclose(m.means[0], [0.3, 0.4])
    assert np.allclose(m.variances[0], 1e-6)
    assert math.isfinite(m.log_likelihood)


def test_input_errors():
    with pytest.raises(ValueError):
        em_fit(np.zeros((3, 2)), 4)
    with pytest.raises(ValueError):
        em_fit(np.array([[0.1, np.nan], [0.2, 0.2]]), 1)


def test_two_gaussian_fixture_recovers_means():
    X, _ = two_gaussians(0)
    m = em_fit(X, 2, seed=0, restarts=5).sorted()
    means = m.means[np.argsort(m.means[:, 0])]
    assert np.abs(means - [[0.10, 0.10], [0.60, 0.20]]).max() < 0.02


def test_deterministic_given_seed():
    X, _ = two_gaussians(3)
    a = em_fit(X, 3, seed=9, restarts=3)
    b = em_fit(X, 3, seed=9, restarts=3)
    assert a.log_likelihood == b.log_likelihood
    assert np.array_equal(a.means, b.means)


def test_restarts_never_worse(rng):
    X = rng.uniform(0, 1, (120, 2))
    one = em_fit(X, 4, seed=1, restarts=1)
    best, all_models = em_fit(X, 4, seed=1, restarts=6, return_all=True)
    assert best.log_likelihood == max(m.log_likelihood for m in all_models)
    assert len(all_models) == 6
    assert all(math.isfinite(m.log_likelihood) for m in all_models)
    assert one.K == 4


@pytest.mark.parametrize("seed", range(40))
def test_monotone_fuzz(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(10, 80))
    X = rng.uniform(0, 1, (n, 2))
    K = int(rng.integers(1, min(6, n) + 1))
    _, models = em_fit(X, K, seed=seed, tol=1e-10, max_iter=300, restarts=3, return_all=True)
    assert all(is_monotone(m) for m in models)


@pytest.mark.parametrize("seed", range(6))
def test_two_way_split_matches_exhaustive_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    X = np.vstack([rng.normal((0.2, 0.2), 0.03, (6, 2)), rng.normal((0.7, 0.3), 0.03, (7, 2))])
    want = best_two_partition(X)
    got = em_fit(X, 2, seed=seed, restarts=10).posteriors(X).argmax(axis=1)
    assert adjusted_rand_index(got, want) == 1.0


def test_bic_hand_value():
    m = MixtureModel(np.ones(1), np.zeros((1, 2)), np.ones((1, 2)), -50.0, 100)
    assert m.n_params == 4
    assert bic(m) == pytest.approx(-100 - 4 * math.log(100))
    m2 = MixtureModel(np.full(2, 0.5), np.zeros((2, 2)), np.ones((2, 2)), -50.0, 100)
    assert bic(m2) < bic(m)


def test_select_single_blob(rng):
    X = rng.normal(0.5, 0.05, (200, 2))
    best, table = select_model(X, range(1, 5), restarts=3)
    assert best.K == 1
    assert [r["K"] for r in table] == [1, 2, 3, 4]


def test_select_and_cv_two_gaussians():
    X, truth = two_gaussians(1)
    best, _ = select_model(X, range(1, 5), restarts=5, seed=1)
    assert best.K == 2
    assert adjusted_rand_index(best.posteriors(X).argmax(1), truth) == 1.0
    cv = cross_validate(X, range(1, 3), seed=1)
    assert cv[2] > cv[1]


def test_cv_identical_points_prefers_one():
    X = np.tile([0.2, 0.2], (30, 1))
    cv = cross_validate(X, range(1, 4), folds=5)
    assert max(cv, key=cv.get) == 1


def test_cv_too_few_points():
    with pytest.raises(ValueError):
        cross_validate(np.random.default_rng(0).uniform(size=(5, 2)), folds=10)


@pytest.mark.parametrize("mean,label", [
    ((0.05, 0.05), ClassLabel.PEAK_DAY),
    ((0.45, 0.10), ClassLabel.BEFORE),
    ((0.10, 0.45), ClassLabel.AFTER),
    ((0.25, 0.30), ClassLabel.SYMMETRIC),
    ((0.20, 0.049), ClassLabel.PEAK_DAY),
])
def test_label_rule(mean, label):
    assert LabelRule()(*mean) is label


def test_label_flags():
    labels, flags = label_components(model_with_means([(0.45, 0.08), (0.08, 0.45),
                                                       (0.3, 0.3), (0.04, 0.04)]))
    assert flags == []
    assert set(labels) == set(ClassLabel)
    labels, flags = label_components(model_with_means([(0.45, 0.08), (0.5, 0.1)]))
    assert len(flags) == 2


def test_assignment_uncertainty_bounds(rng):
    X = rng.uniform(0, 0.5, (60, 2))
    m = em_fit(X, 3, seed=2)
    labels, _ = label_components(m)
    for a in classify_points(m, labels, X):
        assert abs(a.posteriors.sum() - 1) < 1e-9
        assert 0 <= a.uncertainty <= 1 - 1 / 3 + 1e-12
    one = classify(m, labels, X[0], "x")
    assert one.hashtag == "x"


@pytest.mark.parametrize("seed", range(10))
def test_ari_matches_sklearn(seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 4, 50)
    b = np.where(rng.random(50) < 0.7, a, rng.integers(0, 5, 50))
    assert adjusted_rand_index(a, b) == pytest.approx(adjusted_rand_score(a, b), abs=1e-12)


def test_model_and_assignment_roundtrip(tmp_path):
    X, _ = two_gaussians(2, n=30)
    m = em_fit(X, 2, seed=0).sorted()
    labels, _ = label_components(m)
    write_model(tmp_path / "m.json", m, labels)
    back, back_labels = read_model(tmp_path / "m.json")
    assert np.array_equal(back.means, m.means)
    assert back_labels == labels
    assigns = classify_points(m, labels, X, [f"h{i}" for i in range(len(X))])
    write_assignments(tmp_path / "a.csv", assigns, X)
    got = read_assignments(tmp_path / "a.csv")
    assert got["h0"] == (assigns[0].label, assigns[0].uncertainty)
