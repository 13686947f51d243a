"""Per-recording summary statistics and the feature-table file format."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyInput, SchemaMismatch
from .extractors import METHODS

STATS = ("freq_05pc", "freq_med", "freq_95pc", "freq_bw", "fm_med", "fm_75pc", "fm_95pc")
FEATURE_NAMES = tuple(f"{stat}_{m}" for m in METHODS for stat in STATS)
TABLE_COLUMNS = ("source_id", "species") + FEATURE_NAMES


def feature_name(stat: str, method: str) -> str:
    return f"{stat}_{method}"


def percentile(values, p: float) -> float:
    """Linear-interpolation percentile of ``values`` at ``p`` percent.

    With v sorted and h = (n-1)*p/100 the result is
    v[floor(h)] + (h - floor(h)) * (v[ceil(h)] - v[floor(h)]).
    """
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise EmptyInput("percentile of an empty sequence")
    if not 0 <= p <= 100:
        raise ValueError(f"percent must lie in [0, 100], got {p}")
    h = (v.size - 1) * p / 100.0
    lo, hi = math.floor(h), math.ceil(h)
    return float(v[lo] + (h - lo) * (v[hi] - v[lo]))


@dataclass
class FeatureVector:
    """Summary features of one recording; ``None`` marks a missing value."""

    source_id: str
    species: str = ""
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in FEATURE_NAMES:
            self.values.setdefault(name, None)
        unknown = set(self.values) - set(FEATURE_NAMES)
        if unknown:
            raise SchemaMismatch(f"unknown features {sorted(unknown)}")

    def __getitem__(self, name):
        return self.values[name]

    def get(self, name, default=None):
        v = self.values.get(name)
        return default if v is None else v

    def update(self, partial: dict) -> "FeatureVector":
        self.values.update(partial)
        return self


def summarize(atoms, method: str) -> dict:
    """Seven summary statistics for one method's atoms, keyed by feature name.

    Frequency statistics use atom frequencies; FM statistics use |fm_rate|.
    Statistics that cannot be computed are ``None``.
    """
    names = {s: feature_name(s, method) for s in STATS}
    out = {n: None for n in names.values()}
    if len(atoms) == 0:
        return out
    freq = np.array([a.frequency for a in atoms], dtype=float)
    fm = np.abs(np.array([a.fm_rate for a in atoms], dtype=float))
    lo, med, hi = (percentile(freq, p) for p in (5, 50, 95))
    out[names["freq_05pc"]] = lo
    out[names["freq_med"]] = med
    out[names["freq_95pc"]] = hi
    out[names["freq_bw"]] = hi - lo
    out[names["fm_med"]] = percentile(fm, 50)
    out[names["fm_75pc"]] = percentile(fm, 75)
    out[names["fm_95pc"]] = percentile(fm, 95)
    return out


def _fmt(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return repr(float(value))


def write_table(rows, path) -> None:
    """Write feature vectors as comma-separated text (missing values are empty)."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TABLE_COLUMNS)
        for row in rows:
            writer.writerow([row.source_id, row.species] + [_fmt(row.values[n]) for n in FEATURE_NAMES])


def read_table(path) -> list[FeatureVector]:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaMismatch(f"{path}: empty file")
        if tuple(header) != TABLE_COLUMNS:
            extra = sorted(set(header) - set(TABLE_COLUMNS))
            missing = sorted(set(TABLE_COLUMNS) - set(header))
            raise SchemaMismatch(f"{path}: unexpected columns {extra}, missing {missing}")
        rows = []
        for rec in reader:
            if not rec:
                continue
            if len(rec) != len(TABLE_COLUMNS):
                raise SchemaMismatch(f"{path}: row has {len(rec)} fields, expected {len(TABLE_COLUMNS)}")
            values = {n: (float(v) if v != "" else None) for n, v in zip(FEATURE_NAMES, rec[2:])}
            rows.append(FeatureVector(rec[0], rec[1], values))
    return rows


def write_atoms(atoms, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "time", "frequency", "fm_rate", "magnitude"])
        for a in atoms:
            writer.writerow([a.method, repr(a.time), repr(a.frequency), repr(a.fm_rate), repr(a.magnitude)])
