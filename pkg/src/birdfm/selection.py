"""Information-gain feature ranking with MDL-based supervised discretisation."""
from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyDistribution
from .features import FEATURE_NAMES


def entropy(distribution) -> float:
    """Shannon entropy in bits of a vector of counts or probabilities."""
    w = np.asarray(distribution, dtype=float)
    if w.size == 0 or np.any(w < 0) or w.sum() <= 0:
        raise EmptyDistribution("entropy needs non-negative weights with a positive total")
    p = w[w > 0] / w.sum()
    return float(-(p * np.log2(p)).sum())


def _class_entropies(counts: np.ndarray) -> np.ndarray:
    """Row-wise entropy of a 2-D count array (rows may be all zero)."""
    totals = counts.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(totals > 0, counts / totals, 0.0)
        terms = np.where(p > 0, p * np.log2(p), 0.0)
    return -terms.sum(axis=1)


def _mdl_split(values: np.ndarray, codes: np.ndarray, n_classes: int):
    """Best Fayyad-Irani split of a sorted segment, or None if MDL rejects it."""
    n = len(values)
    if n < 2:
        return None
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), codes] = 1.0
    left = np.cumsum(onehot, axis=0)[:-1]
    total = left[-1] + onehot[-1]
    right = total - left
    boundary = np.flatnonzero(values[1:] > values[:-1])  # split after index i
    if boundary.size == 0:
        return None
    nl = (boundary + 1).astype(float)
    nr = n - nl
    h_l = _class_entropies(left[boundary])
    h_r = _class_entropies(right[boundary])
    info = (nl * h_l + nr * h_r) / n
    j = int(np.argmin(info))
    i = int(boundary[j])

    h_s = entropy(total)
    gain = h_s - info[j]
    k = np.count_nonzero(total)
    k1 = np.count_nonzero(left[i])
    k2 = np.count_nonzero(right[i])
    delta = math.log2(3**k - 2) - (k * h_s - k1 * h_l[j] - k2 * h_r[j])
    if gain <= (math.log2(n - 1) + delta) / n:
        return None
    return i


def discretize_mdl(values, labels) -> list[float]:
    """Cut points from recursive entropy-minimising splits accepted by the MDL criterion.

    Missing values (None / NaN) are ignored. Cut points are midpoints between
    adjacent distinct values.
    """
    x, y = _paired(values, labels)
    if len(x) < 2:
        return []
    order = np.argsort(x, kind="stable")
    x = x[order]
    _, codes = np.unique(y[order], return_inverse=True)
    n_classes = int(codes.max()) + 1
    cuts = []

    def recurse(lo, hi):
        i = _mdl_split(x[lo:hi], codes[lo:hi], n_classes)
        if i is None:
            return
        cuts.append(0.5 * (x[lo + i] + x[lo + i + 1]))
        recurse(lo, lo + i + 1)
        recurse(lo + i + 1, hi)

    recurse(0, len(x))
    return sorted(cuts)


def _paired(values, labels):
    x = np.array([np.nan if v is None else v for v in values], dtype=float)
    y = np.asarray(labels, dtype=object)
    if len(x) != len(y):
        raise ValueError("values and labels differ in length")
    keep = ~np.isnan(x)
    return x[keep], y[keep]


def information_gain(values, labels) -> float:
    """H(labels) - H(labels | discretised feature), in bits.

    Rows with a missing value are excluded, and the gain measured on the
    remaining rows is scaled by their fraction of the whole column.
    """
    n_all = len(labels)
    x, y = _paired(values, labels)
    if len(x) < 2:
        return 0.0
    cuts = discretize_mdl(x, y)
    if not cuts:
        return 0.0
    h = entropy(list(Counter(y).values()))
    bins = np.searchsorted(np.asarray(cuts), x, side="right")
    cond = 0.0
    for b in np.unique(bins):
        sel = y[bins == b]
        cond += len(sel) / len(y) * entropy(list(Counter(sel).values()))
    gain = max(h - cond, 0.0)
    return gain * len(x) / n_all


@dataclass
class LabelledTable:
    """Feature rows with species labels; needs at least two species."""

    rows: list
    features: tuple = FEATURE_NAMES
    class_counts: dict = field(init=False)

    def __post_init__(self):
        labels = [r.species for r in self.rows]
        if any(not s for s in labels):
            raise ValueError("every row needs a species label")
        self.class_counts = dict(Counter(labels))
        if len(self.class_counts) < 2:
            raise ValueError("a labelled table needs at least two species")

    @property
    def labels(self) -> np.ndarray:
        return np.array([r.species for r in self.rows], dtype=object)

    def column(self, name: str) -> np.ndarray:
        return np.array([np.nan if r.values.get(name) is None else r.values[name] for r in self.rows],
                        dtype=float)

    def matrix(self, names) -> np.ndarray:
        return np.column_stack([self.column(n) for n in names])


def rank_features(table: LabelledTable) -> list[tuple[str, float]]:
    """Features by descending information gain; ties in alphabetical order."""
    labels = table.labels
    scored = [(name, information_gain(table.column(name), labels)) for name in table.features]
    return sorted(scored, key=lambda item: (-item[1], item[0]))


def write_ranking(ranking, path) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rank", "ig", "feature"])
        for i, (name, ig) in enumerate(ranking, start=1):
            writer.writerow([i, f"{ig:.4f}", name])
