import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from birdfm.errors import EmptyDistribution
from birdfm.features import FEATURE_NAMES, FeatureVector
from birdfm.selection import LabelledTable, discretize_mdl, entropy, information_gain, rank_features, write_ranking


def mdl_accepts(left, right):
    """Hand evaluation of the Fayyad-Irani acceptance test for one two-class split."""
    def h(counts):
        n = sum(counts)
        return -sum(c / n * math.log2(c / n) for c in counts if c)
    s = [a + b for a, b in zip(left, right)]
    n = sum(s)
    info = (sum(left) * h(left) + sum(right) * h(right)) / n
    gain = h(s) - info
    k, k1, k2 = (sum(1 for c in x if c) for x in (s, left, right))
    delta = math.log2(3**k - 2) - (k * h(s) - k1 * h(left) - k2 * h(right))
    return gain > (math.log2(n - 1) + delta) / n


def table(columns, labels):
    rows = []
    for i, y in enumerate(labels):
        rows.append(FeatureVector(f"r{i}", y, {n: (None if np.isnan(c[i]) else float(c[i]))
                                                for n, c in columns.items()}))
    return LabelledTable(rows)


def test_entropy_examples():
    assert entropy([1, 1, 1, 1]) == 2.0
    assert entropy([7]) == 0.0
    assert entropy([0.5, 0.25, 0.25]) == 1.5
    for bad in ([], [0, 0], [-1, 2]):
        with pytest.raises(EmptyDistribution):
            entropy(bad)


def test_constant_feature_has_no_cuts():
    assert discretize_mdl([5.0] * 20, ["a", "b"] * 10) == []
    assert information_gain([5.0] * 20, ["a", "b"] * 10) == 0.0


def test_one_clean_cut():
    # the hand-evaluated acceptance inequality holds for the (3 A | 3 B) split
    assert mdl_accepts([3, 0], [0, 3])
    cuts = discretize_mdl([1, 2, 3, 10, 11, 12], list("AAABBB"))
    assert len(cuts) == 1 and 3 < cuts[0] < 10
    assert information_gain([1, 2, 3, 10, 11, 12], list("AAABBB")) == pytest.approx(1.0)


def test_injective_encoding_four_classes():
    labels = [c for c in "ABCD" for _ in range(50)]
    values = [ord(c) + 0.01 * i for i, c in enumerate(labels)]
    assert information_gain(values, labels) == pytest.approx(2.0, abs=1e-9)


def test_shuffled_labels_rarely_cut():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(50)
    labels = np.array(["a"] * 25 + ["b"] * 25)
    no_cut = sum(not discretize_mdl(x, rng.permutation(labels)) for _ in range(100))
    assert no_cut >= 95


def test_missing_values_scale_gain():
    v = [1, 2, 3, 10, 11, 12, None, None]
    assert information_gain(v, list("AAABBBAB")) == pytest.approx(1.0 * 6 / 8)


@given(st.lists(st.floats(-1e3, 1e3), min_size=4, max_size=60), st.integers(0, 2**16))
def test_ig_bounds_and_monotone_invariance(values, seed):
    rng = np.random.default_rng(seed)
    labels = rng.choice(list("abc"), size=len(values))
    ig = information_gain(values, labels)
    _, counts = np.unique(labels, return_counts=True)
    assert -1e-12 <= ig <= entropy(counts) + 1e-12
    transformed = [math.atan(v / 100.0) * 3 + 7 for v in values]
    # in floating point the transform can merge nearly equal values; then it is not strictly monotone
    assume(len(set(transformed)) == len(set(values)))
    assert information_gain(transformed, labels) == pytest.approx(ig, abs=1e-12)


def test_rank_features(tmp_path):
    rng = np.random.default_rng(5)
    labels = ["x"] * 30 + ["y"] * 30
    cols = {n: rng.standard_normal(60) for n in FEATURE_NAMES}
    cols["fm_med_dd"] = np.r_[rng.uniform(0, 1, 30), rng.uniform(5, 6, 30)]
    cols["freq_bw_mp"] = np.full(60, np.nan)
    ranking = rank_features(table(cols, labels))
    assert len(ranking) == 28 and ranking[0] == ("fm_med_dd", pytest.approx(1.0))
    assert all(ig == 0 for _, ig in ranking[1:])
    assert [n for n, _ in ranking[1:]] == sorted(n for n, _ in ranking[1:])
    assert rank_features(table(cols, labels)) == ranking
    write_ranking(ranking, tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "rank,ig,feature" and lines[1] == "1,1.0000,fm_med_dd" and len(lines) == 29


def test_duplicate_column_gets_same_ig():
    rng = np.random.default_rng(2)
    labels = ["x"] * 20 + ["y"] * 20
    cols = {n: rng.standard_normal(40) for n in FEATURE_NAMES}
    cols["fm_med_ss"] = np.r_[np.arange(20), np.arange(20) + 100.0]
    cols["fm_med_rm"] = cols["fm_med_ss"].copy()
    ranking = rank_features(table(cols, labels))
    assert ranking[0][0] == "fm_med_rm" and ranking[1][0] == "fm_med_ss"
    assert ranking[0][1] == ranking[1][1]


def test_table_needs_two_species():
    with pytest.raises(ValueError):
        LabelledTable([FeatureVector("a", "x"), FeatureVector("b", "x")])
    with pytest.raises(ValueError):
        LabelledTable([FeatureVector("a", "x"), FeatureVector("b", "")])
