"""Corpus-level orchestration: feature extraction and the runtime benchmark."""
from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from joblib import Parallel, delayed

from .errors import BirdFMError
from .extractors import METHODS, ChirpGrid, extract
from .features import FeatureVector, summarize, write_atoms
from .ingest import load
from .spectral import AnalysisConfig

log = logging.getLogger(__name__)


def extract_recording(clip, species: str = "", methods=METHODS, cfg: AnalysisConfig = AnalysisConfig(),
                      grid: ChirpGrid | None = None, atoms_out=None) -> FeatureVector:
    """Feature vector of one canonical clip; methods that find nothing leave missing values."""
    row = FeatureVector(clip.source_id, species)
    collected = []
    for m in methods:
        try:
            atoms = extract(clip, m, cfg, grid)
        except BirdFMError as exc:
            log.warning("%s: method %s produced no atoms (%s)", clip.source_id, m, exc)
            atoms = []
        row.update(summarize(atoms, m))
        collected.extend(atoms)
    if atoms_out is not None:
        write_atoms(collected, atoms_out)
    return row


def _extract_entry(i, entry, methods, cfg, grid, transform, atoms_dir):
    try:
        clip = load(entry.path)
        if transform is not None:
            clip = transform(clip, i)
    except (BirdFMError, OSError) as exc:
        return None, str(exc)
    atoms_out = None
    if atoms_dir is not None:
        atoms_out = Path(atoms_dir) / f"{i:05d}_{Path(entry.path).stem}.atoms.csv"
    row = extract_recording(clip, entry.species, methods, cfg, grid, atoms_out)
    row.source_id = str(entry.path)
    return row, None


def extract_corpus(entries, cfg: AnalysisConfig | None = None, methods=None, grid=None,
                   n_jobs: int = 1, transform=None, atoms_dir=None):
    """Extract features for every manifest entry.

    Returns (rows in manifest order, [(path, error message)] for skipped files).
    ``transform(clip, index)`` is applied after canonicalisation, e.g. a
    degradation.
    """
    cfg = cfg or AnalysisConfig()
    methods = tuple(methods or METHODS)
    if atoms_dir is not None:
        Path(atoms_dir).mkdir(parents=True, exist_ok=True)
    jobs = (delayed(_extract_entry)(i, e, methods, cfg, grid, transform, atoms_dir)
            for i, e in enumerate(entries))
    results = Parallel(n_jobs=n_jobs)(jobs) if n_jobs != 1 else [j[0](*j[1], **j[2]) for j in jobs]
    rows, failures = [], []
    for entry, (row, err) in zip(entries, results):
        if err is not None:
            log.warning("%s: skipped (%s)", entry.path, err)
            failures.append((str(entry.path), err))
        else:
            rows.append(row)
    return rows, failures


@dataclass
class BenchResult:
    audio_seconds: float = 0.0
    ingest_seconds: float = 0.0
    method_seconds: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def ratio(self, method: str) -> float:
        return self.method_seconds[method] / self.audio_seconds

    def write(self, path) -> None:
        with open(Path(path), "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["method", "seconds", "audio_seconds", "ratio"])
            writer.writerow(["ingest", f"{self.ingest_seconds:.6f}", f"{self.audio_seconds:.3f}",
                             f"{self.ingest_seconds / self.audio_seconds:.6f}"])
            for m, s in self.method_seconds.items():
                writer.writerow([m, f"{s:.6f}", f"{self.audio_seconds:.3f}", f"{self.ratio(m):.6f}"])


def bench(entries, methods=None, cfg: AnalysisConfig | None = None, grid=None) -> BenchResult:
    """Single-threaded extraction time per method, relative to audio duration.

    Decoding and resampling are timed separately and excluded from the
    per-method figures.
    """
    cfg = cfg or AnalysisConfig()
    grid = grid or ChirpGrid.default()
    methods = tuple(methods or METHODS)
    result = BenchResult(method_seconds={m: 0.0 for m in methods})
    clips = []
    for e in entries:
        t0 = time.perf_counter()
        try:
            clip = load(e.path)
        except (BirdFMError, OSError) as exc:
            result.failures.append((str(e.path), str(exc)))
            continue
        result.ingest_seconds += time.perf_counter() - t0
        result.audio_seconds += clip.duration
        clips.append(clip)
    if not clips or result.audio_seconds <= 0:
        raise ValueError("no audio to benchmark")
    for m in methods:
        for clip in clips:
            t0 = time.perf_counter()
            try:
                extract(clip, m, cfg, grid)
            except BirdFMError:
                pass
            result.method_seconds[m] += time.perf_counter() - t0
    return result
