"""Species classification: one-vs-rest RBF SVMs scored by weighted AUC.

The SVM solver is libsvm's SMO (via scikit-learn's ``SVC``) at KKT
tolerance 1e-3. Cross-validation folds are fixed by one seed and shared by
every (method, feature set) cell so that per-fold results can be compared
as repeated measures.
"""
from __future__ import annotations

import csv
import itertools
import logging
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import rankdata
from sklearn.svm import SVC

from .errors import SchemaMismatch, SingleClass
from .extractors import METHODS
from .features import feature_name

log = logging.getLogger(__name__)

FEATURE_SETS = {
    "FM": ("fm_med", "fm_75pc", "fm_95pc"),
    "Freq": ("freq_05pc", "freq_med", "freq_95pc"),
    "Top2": ("freq_med", "fm_75pc"),
    "FMFreq": ("fm_med", "fm_75pc", "fm_95pc", "freq_05pc", "freq_med", "freq_95pc"),
}

GAMMA_GRID = tuple(2.0**e for e in range(-9, 2, 2))
C_GRID = tuple(2.0**e for e in range(-3, 8, 2))
KKT_TOL = 1e-3


class DegenerateFeature(UserWarning):
    pass


class TooFewPerClass(UserWarning):
    pass


@dataclass(frozen=True)
class FeatureSetSpec:
    name: str
    stats: tuple

    def __post_init__(self):
        if any(s == "freq_bw" for s in self.stats):
            raise ValueError("bandwidth features are excluded from classification")

    def columns(self, method: str) -> list[str]:
        return [feature_name(s, method) for s in self.stats]

    @classmethod
    def named(cls, name: str) -> "FeatureSetSpec":
        return cls(name, FEATURE_SETS[name])


@dataclass(frozen=True)
class FoldResult:
    method: str
    feature_set: str
    fold: int
    weighted_auc: float


@dataclass
class SVMModel:
    classes: np.ndarray
    columns: list
    kept: np.ndarray          # boolean mask over columns
    mean: np.ndarray
    scale: np.ndarray
    machines: list            # one binary SVC per class, positive = that class

    def standardize(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != len(self.columns):
            raise SchemaMismatch(f"expected {len(self.columns)} columns, got shape {X.shape}")
        Z = (X[:, self.kept] - self.mean) / self.scale
        # missing values sit at the training mean
        return np.where(np.isnan(Z), 0.0, Z)


def train_svm(train, columns=None, gamma: float = 0.1, C: float = 1.0, labels=None) -> SVMModel:
    """Fit one-vs-rest soft-margin RBF SVMs on standardised features.

    ``train`` is either a :class:`~birdfm.selection.LabelledTable` (features
    taken from ``columns``) or a 2-D array with ``labels`` given separately.
    Standardisation statistics come from the training rows only. Columns with
    zero variance are dropped with a :class:`DegenerateFeature` warning.
    """
    if hasattr(train, "matrix"):
        X, y = train.matrix(columns), train.labels
    else:
        X, y = train, labels
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=object)
    columns = list(columns) if columns is not None else [f"x{i}" for i in range(X.shape[1])]
    classes = np.array(sorted(set(y)), dtype=object)
    if len(classes) < 2:
        raise SingleClass("training data holds a single class")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        mean = np.nanmean(X, axis=0)
        std = np.nanstd(X, axis=0)
    kept = np.isfinite(std) & (std > 0)
    for name in np.array(columns)[~kept]:
        warnings.warn(f"dropping zero-variance feature {name}", DegenerateFeature, stacklevel=2)
    model = SVMModel(classes, columns, kept, mean[kept], std[kept], [])
    Z = model.standardize(X)
    for c in classes:
        target = (y == c).astype(int)
        svc = SVC(kernel="rbf", gamma=gamma, C=C, tol=KKT_TOL, shrinking=True)
        svc.fit(Z, target)
        model.machines.append(svc)
    return model


def decision_scores(model: SVMModel, X) -> np.ndarray:
    """One-vs-rest decision values, shape (rows, classes); higher = more class-like."""
    Z = model.standardize(X)
    if Z.shape[1] == 0:
        return np.zeros((len(Z), len(model.classes)))
    return np.column_stack([m.decision_function(Z) for m in model.machines])


def binary_auc(scores, positive) -> float:
    """Area under the ROC curve via the rank-sum statistic (ties count 1/2)."""
    scores = np.asarray(scores, dtype=float)
    positive = np.asarray(positive, dtype=bool)
    n_pos = int(positive.sum())
    n_neg = len(positive) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("AUC needs both positive and negative rows")
    ranks = rankdata(scores)
    return float((ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def weighted_auc(scores, labels, classes=None) -> float:
    """Prevalence-weighted mean of one-vs-rest AUCs.

    ``scores`` has one column per entry of ``classes`` (sorted distinct labels
    by default). Classes absent from ``labels`` carry zero weight.
    """
    labels = np.asarray(labels, dtype=object)
    scores = np.asarray(scores, dtype=float)
    if classes is None:
        classes = sorted(set(labels))
    if scores.ndim == 1:
        scores = scores[:, None]
    present = set(labels)
    if len(present) < 2:
        raise SingleClass("weighted AUC needs at least two classes")
    total, acc = 0, 0.0
    for j, c in enumerate(classes):
        pos = labels == c
        n = int(pos.sum())
        if n == 0:
            continue
        acc += n * binary_auc(scores[:, j], pos)
        total += n
    return acc / total


def stratified_folds(labels, k: int, seed: int) -> np.ndarray:
    """Fold index per row: members of each class are shuffled and dealt round-robin.

    The dealing position carries over between classes, so fold sizes differ by
    at most one and each class is spread as evenly as its size allows.
    """
    labels = np.asarray(labels, dtype=object)
    rng = np.random.default_rng(seed)
    folds = np.empty(len(labels), dtype=int)
    offset = 0
    for c in sorted(set(labels)):
        idx = np.flatnonzero(labels == c)
        if len(idx) < k:
            warnings.warn(f"class {c!r} has {len(idx)} < {k} members; dealt round-robin",
                          TooFewPerClass, stacklevel=2)
        idx = idx[rng.permutation(len(idx))]
        folds[idx] = (offset + np.arange(len(idx))) % k
        offset = (offset + len(idx)) % k
    return folds


def _cv_auc(X, y, gamma, C, folds, k):
    aucs = []
    for f in range(k):
        test = folds == f
        train = ~test
        if len(set(y[train])) < 2 or len(set(y[test])) < 2:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateFeature)
            model = train_svm(X[train], gamma=gamma, C=C, labels=y[train])
        aucs.append(weighted_auc(decision_scores(model, X[test]), y[test], model.classes))
    return float(np.mean(aucs)) if aucs else float("nan")


def select_hyperparameters(X, y, seed: int, inner_folds: int = 3,
                           gammas=GAMMA_GRID, Cs=C_GRID) -> tuple[float, float]:
    """Grid search by inner cross-validated weighted AUC; first best wins."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TooFewPerClass)
        folds = stratified_folds(y, inner_folds, seed)
    best, best_auc = (gammas[len(gammas) // 2], Cs[len(Cs) // 2]), -np.inf
    for gamma, C in itertools.product(gammas, Cs):
        auc = _cv_auc(X, y, gamma, C, folds, inner_folds)
        if np.isfinite(auc) and auc > best_auc:
            best, best_auc = (gamma, C), auc
    return best


def evaluate_cell(X, y, folds, k, fold, seed, gammas=GAMMA_GRID, Cs=C_GRID) -> float:
    test = folds == fold
    train = ~test
    Xtr, ytr = X[train], y[train]
    gamma, C = select_hyperparameters(Xtr, ytr, seed + 1000 * (fold + 1), gammas=gammas, Cs=Cs)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateFeature)
        model = train_svm(Xtr, gamma=gamma, C=C, labels=ytr)
    try:
        return weighted_auc(decision_scores(model, X[test]), y[test], model.classes)
    except SingleClass:
        log.warning("fold %d holds a single class; AUC undefined", fold)
        return float("nan")


def run_experiment(table, methods=METHODS, feature_sets=tuple(FEATURE_SETS), folds: int = 10,
                   seed: int = 0, n_jobs: int = 1, gammas=GAMMA_GRID, Cs=C_GRID) -> list[FoldResult]:
    """Cross-validated weighted AUC for every method x feature-set x fold cell."""
    if folds < 2:
        raise ValueError("need at least two folds")
    y = table.labels
    assignment = stratified_folds(y, folds, seed)
    jobs, keys = [], []
    for method in methods:
        for set_name in feature_sets:
            spec = FeatureSetSpec.named(set_name)
            X = table.matrix(spec.columns(method))
            for f in range(folds):
                keys.append((method, set_name, f))
                jobs.append(delayed(evaluate_cell)(X, y, assignment, folds, f, seed, gammas, Cs))
    aucs = Parallel(n_jobs=n_jobs)(jobs)
    return [FoldResult(m, s, f, float(a)) for (m, s, f), a in zip(keys, aucs)]


def write_folds(results, path) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "feature_set", "fold", "weighted_auc"])
        for r in results:
            writer.writerow([r.method, r.feature_set, r.fold, f"{r.weighted_auc:.4f}"])


def read_folds(path) -> list[FoldResult]:
    with open(Path(path), newline="", encoding="utf-8") as fh:
        return [FoldResult(r["method"], r["feature_set"], int(r["fold"]), float(r["weighted_auc"]))
                for r in csv.DictReader(fh)]


def marginal_means(results) -> dict:
    """Mean weighted AUC per method and per feature set."""
    out = {}
    for key in ("method", "feature_set"):
        groups = {}
        for r in results:
            groups.setdefault(getattr(r, key), []).append(r.weighted_auc)
        out[key] = {g: float(np.mean(v)) for g, v in groups.items()}
    return out
