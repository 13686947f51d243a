import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from birdfm.errors import SchemaMismatch, SingleClass
from birdfm.evaluation import (FEATURE_SETS, DegenerateFeature, FeatureSetSpec, TooFewPerClass, binary_auc,
                               decision_scores, evaluate_cell, marginal_means, read_folds, run_experiment,
                               select_hyperparameters, stratified_folds, train_svm, weighted_auc, write_folds)
from birdfm.features import FEATURE_NAMES, FeatureVector
from birdfm.selection import LabelledTable


def pair_count_auc(scores, positive):
    """Brute-force oracle: fraction of (pos, neg) pairs ordered correctly, ties 1/2."""
    pos = [s for s, p in zip(scores, positive) if p]
    neg = [s for s, p in zip(scores, positive) if not p]
    wins = sum(1.0 if a > b else 0.5 if a == b else 0.0 for a in pos for b in neg)
    return wins / (len(pos) * len(neg))


def predict(model, X):
    return model.classes[np.argmax(decision_scores(model, X), axis=1)]


def test_separable_blobs():
    rng = np.random.default_rng(0)
    X = np.r_[rng.normal(-3, 0.5, (40, 2)), rng.normal(3, 0.5, (40, 2))]
    y = np.array(["a"] * 40 + ["b"] * 40, dtype=object)
    model = train_svm(X, gamma=0.5, C=1.0, labels=y)
    assert np.all(predict(model, X) == y)
    assert decision_scores(model, X[:1])[0, 0] > 0


def test_xor_with_grid_search():
    rng = np.random.default_rng(1)
    X = rng.uniform(-1, 1, (200, 2))
    y = np.where((X[:, 0] > 0) ^ (X[:, 1] > 0), "p", "q").astype(object)
    gamma, C = select_hyperparameters(X, y, seed=0)
    model = train_svm(X, gamma=gamma, C=C, labels=y)
    assert np.mean(predict(model, X) == y) >= 0.95


def test_single_class():
    with pytest.raises(SingleClass):
        train_svm(np.zeros((5, 2)), labels=["a"] * 5)


def test_symmetric_midpoint():
    rng = np.random.default_rng(2)
    A = rng.normal(0, 0.4, (15, 2)) + [-2, 0]
    X = np.r_[A, A * [-1, 1]]
    y = np.array(["a"] * 15 + ["b"] * 15, dtype=object)
    model = train_svm(X, gamma=0.5, C=1.0, labels=y)
    s = decision_scores(model, np.array([[0.0, 0.3]]))[0]
    assert s[0] == pytest.approx(s[1], abs=1e-6)


def test_duplicate_rows_identical_scores():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((30, 3))
    y = np.array(["a", "b", "c"] * 10, dtype=object)
    model = train_svm(X, labels=y)
    s = decision_scores(model, np.r_[X[:1], X[:1]])
    np.testing.assert_array_equal(s[0], s[1])


def test_schema_mismatch():
    model = train_svm(np.random.default_rng(0).standard_normal((10, 3)), labels=["a", "b"] * 5)
    with pytest.raises(SchemaMismatch):
        decision_scores(model, np.zeros((2, 4)))


def test_degenerate_feature_dropped():
    X = np.c_[np.random.default_rng(0).standard_normal(20), np.ones(20)]
    with pytest.warns(DegenerateFeature):
        model = train_svm(X, labels=["a", "b"] * 10)
    assert list(model.kept) == [True, False]


def test_bandwidth_excluded():
    with pytest.raises(ValueError):
        FeatureSetSpec("bad", ("freq_bw", "fm_med"))
    assert FeatureSetSpec.named("FMFreq").columns("dd") == [
        "fm_med_dd", "fm_75pc_dd", "fm_95pc_dd", "freq_05pc_dd", "freq_med_dd", "freq_95pc_dd"]


def test_weighted_auc_examples():
    labels = np.array(["a", "b", "c"] * 5, dtype=object)
    perfect = np.stack([(labels == c).astype(float) for c in "abc"], axis=1)
    assert weighted_auc(perfect, labels) == 1.0
    assert weighted_auc(-perfect, labels) == 0.0
    with pytest.raises(SingleClass):
        weighted_auc(perfect, np.array(["a"] * 15, dtype=object))


def test_weighted_auc_random_scores():
    rng = np.random.default_rng(4)
    vals = []
    for _ in range(100):
        labels = rng.choice(np.array(["a", "b", "c"], dtype=object), 500)
        vals.append(weighted_auc(rng.standard_normal((500, 3)), labels))
    vals = np.array(vals)
    assert abs(vals.mean() - 0.5) <= 0.05 and np.mean(np.abs(vals - 0.5) <= 0.05) >= 0.95


def test_weighted_auc_prevalence_weights():
    # oracle: per-class pair counting, combined by class counts
    rng = np.random.default_rng(5)
    labels = np.array(["a"] * 10 + ["b"] * 30 + ["c"] * 60, dtype=object)
    scores = rng.standard_normal((100, 3))
    expect = sum(n * pair_count_auc(scores[:, j], labels == c)
                 for j, (c, n) in enumerate((("a", 10), ("b", 30), ("c", 60)))) / 100
    assert weighted_auc(scores, labels) == pytest.approx(expect, abs=1e-12)


@given(st.lists(st.integers(-5, 5), min_size=4, max_size=60), st.integers(0, 2**16))
def test_binary_auc_matches_pair_counting(scores, seed):
    positive = np.random.default_rng(seed).random(len(scores)) < 0.5
    if positive.all() or not positive.any():
        positive[0] = not positive[0]
    assert binary_auc(scores, positive) == pytest.approx(pair_count_auc(scores, positive), abs=1e-12)


@given(st.integers(0, 2**16))
def test_auc_invariant_under_increasing_transform(seed):
    rng = np.random.default_rng(seed)
    labels = rng.choice(np.array(["a", "b"], dtype=object), 40)
    labels[:2] = ["a", "b"]
    s = rng.standard_normal((40, 2))
    assert weighted_auc(np.exp(3 * s) + 1, labels) == pytest.approx(weighted_auc(s, labels), abs=1e-12)


@given(st.lists(st.sampled_from("abcd"), min_size=12, max_size=120), st.integers(2, 10), st.integers(0, 99))
def test_fold_partition_and_stratification(labels, k, seed):
    labels = np.array(labels, dtype=object)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TooFewPerClass)
        folds = stratified_folds(labels, k, seed)
    assert folds.shape == labels.shape and set(folds) <= set(range(k))
    sizes = np.bincount(folds, minlength=k)
    assert sizes.max() - sizes.min() <= 1
    for c in set(labels):
        per = np.bincount(folds[labels == c], minlength=k)
        expect = (labels == c).sum() / k
        assert np.all(np.abs(per - expect) <= 1)


def test_too_few_per_class_warns():
    with pytest.warns(TooFewPerClass):
        stratified_folds(np.array(["a"] * 20 + ["b"] * 3, dtype=object), 5, 0)


def test_no_leakage_from_test_labels():
    rng = np.random.default_rng(6)
    X = rng.standard_normal((60, 3))
    y = np.array(["a", "b"] * 30, dtype=object)
    folds = stratified_folds(y, 5, 0)
    test = folds == 0
    y2 = y.copy()
    y2[test] = rng.permutation(y2[test])
    h1 = select_hyperparameters(X[~test], y[~test], 7)
    h2 = select_hyperparameters(X[~test], y2[~test], 7)
    assert h1 == h2
    m1 = train_svm(X[~test], gamma=h1[0], C=h1[1], labels=y[~test])
    m2 = train_svm(X[~test], gamma=h2[0], C=h2[1], labels=y2[~test])
    np.testing.assert_array_equal(decision_scores(m1, X), decision_scores(m2, X))


def random_table(n=40, seed=0, informative=True):
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        y = "ab"[i % 2]
        vals = {f: float(rng.standard_normal() + (3 * (y == "b") if informative and "fm" in f else 0))
                for f in FEATURE_NAMES}
        rows.append(FeatureVector(f"r{i}", y, vals))
    return LabelledTable(rows)


def test_experiment_cardinality_and_determinism(tmp_path):
    table = random_table()
    kw = dict(gammas=(0.5,), Cs=(1.0,))
    res = run_experiment(table, folds=10, seed=3, **kw)
    assert len(res) == 160
    assert {(r.method, r.feature_set) for r in res} == {(m, s) for m in "ss rm mp dd".split() for s in FEATURE_SETS}
    assert all(0 <= r.weighted_auc <= 1 for r in res)
    assert run_experiment(table, folds=10, seed=3, **kw) == res
    write_folds(res, tmp_path / "f.csv")
    back = read_folds(tmp_path / "f.csv")
    assert [(r.method, r.feature_set, r.fold) for r in back] == [(r.method, r.feature_set, r.fold) for r in res]
    means = marginal_means(res)
    assert means["feature_set"]["FM"] > 0.9 and means["feature_set"]["Freq"] < 0.8


def test_experiment_parallel_matches_serial():
    table = random_table(30, seed=1)
    kw = dict(methods=("ss",), feature_sets=("FM",), folds=3, seed=0, gammas=(0.5, 2.0), Cs=(1.0,))
    assert run_experiment(table, n_jobs=2, **kw) == run_experiment(table, n_jobs=1, **kw)


def test_single_class_test_fold_gives_nan():
    X = np.random.default_rng(0).standard_normal((12, 2))
    y = np.array(["a"] * 6 + ["b"] * 6, dtype=object)
    folds = np.array([0] * 3 + [1] * 3 + [1] * 6)
    assert np.isnan(evaluate_cell(X, y, folds, 2, 0, 0, gammas=(1.0,), Cs=(1.0,)))
