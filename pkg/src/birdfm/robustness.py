"""Audio degradations and clean-versus-degraded feature correlation."""
from __future__ import annotations

import csv
import logging
import math
import shlex
import subprocess
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CodecFailed, CodecUnavailable, InsufficientPairs, ZeroVariance
from .features import FEATURE_NAMES
from .ingest import AudioClip, canonicalize, decode, write_wav

log = logging.getLogger(__name__)

DEFAULT_CODEC_COMMAND = "lame --silent -b 64 {in} {in}.mp3 && lame --silent --decode {in}.mp3 {out}"
IDENTITY_CODEC_COMMAND = "cp {in} {out}"


@dataclass(frozen=True)
class DegradationSpec:
    kind: str = "white_noise"                # or "external_codec"
    noise_level: float = -45.0               # dBFS
    codec_command: str = DEFAULT_CODEC_COMMAND
    rng_seed: int = 0
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("white_noise", "external_codec"):
            raise ValueError(f"unknown degradation kind {self.kind!r}")
        if self.noise_level > 0:
            raise ValueError("noise level must be <= 0 dBFS")
        if not self.name:
            object.__setattr__(self, "name", "noise" if self.kind == "white_noise" else "codec")


def noise_rms(level_db: float) -> float:
    return 10.0 ** (level_db / 20.0)


def add_white_noise(clip: AudioClip, level: float = -45.0, seed: int = 0) -> AudioClip:
    """Add Gaussian white noise at ``level`` dB re full scale (RMS), then clip to [-1, 1]."""
    if level > 0:
        raise ValueError("noise level must be <= 0 dBFS")
    rng = np.random.default_rng(seed)
    noisy = clip.samples + noise_rms(level) * rng.standard_normal(len(clip.samples))
    return AudioClip(np.clip(noisy, -1.0, 1.0), clip.sample_rate, clip.source_id)


# bounds concurrent codec processes across threads
_codec_slots = threading.BoundedSemaphore(4)


def set_codec_concurrency(limit: int) -> None:
    global _codec_slots
    _codec_slots = threading.BoundedSemaphore(max(1, int(limit)))


def degrade_codec(clip: AudioClip, spec: DegradationSpec, workdir=None) -> AudioClip:
    """Round-trip the clip through an external encode/decode command.

    The command template is run by the shell with ``{in}`` and ``{out}``
    replaced by quoted paths of a 32-bit float WAV input and the expected
    PCM output. The result is canonicalised and trimmed or zero-padded to the
    input length to absorb codec delay/padding.
    """
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        src = Path(tmp) / "in.wav"
        dst = Path(tmp) / "out.wav"
        write_wav(src, clip.samples, clip.sample_rate)
        command = spec.codec_command.replace("{in}", shlex.quote(str(src))).replace(
            "{out}", shlex.quote(str(dst)))
        with _codec_slots:
            proc = subprocess.run(command, shell=True, capture_output=True, text=True)
        if proc.returncode == 127:
            raise CodecUnavailable(f"codec command not found: {spec.codec_command}")
        if proc.returncode != 0:
            raise CodecFailed(f"codec exited with {proc.returncode}: {proc.stderr.strip()[-500:]}")
        if not dst.is_file():
            raise CodecFailed("codec produced no output file")
        out = canonicalize(decode(dst), rate=clip.sample_rate)
    samples = out.samples[: len(clip.samples)]
    if len(samples) < len(clip.samples):
        samples = np.pad(samples, (0, len(clip.samples) - len(samples)))
    return AudioClip(samples, clip.sample_rate, clip.source_id)


def probe_codec(spec: DegradationSpec, workdir=None) -> None:
    """Run the codec on a short silent clip; raises CodecUnavailable or CodecFailed."""
    degrade_codec(AudioClip(np.zeros(4800), 48000, "probe"), spec, workdir)


def apply_degradation(clip: AudioClip, spec: DegradationSpec, workdir=None, index: int = 0) -> AudioClip:
    if spec.kind == "white_noise":
        # one deterministic stream per recording
        return add_white_noise(clip, spec.noise_level, seed=(spec.rng_seed, index))
    return degrade_codec(clip, spec, workdir)


def _pairs(x, y):
    x = np.array([np.nan if v is None else v for v in x], dtype=float)
    y = np.array([np.nan if v is None else v for v in y], dtype=float)
    keep = np.isfinite(x) & np.isfinite(y)
    return x[keep], y[keep]


def pearson_r(x, y) -> float:
    """Sample Pearson correlation over pairs where both values are present."""
    x, y = _pairs(x, y)
    if len(x) < 3:
        raise InsufficientPairs(f"{len(x)} complete pairs; need at least 3")
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy, sxy = dx @ dx, dy @ dy, dx @ dy
    if sxx == 0 or syy == 0:
        raise ZeroVariance("a sequence has zero variance")
    return float(np.clip(sxy / math.sqrt(sxx * syy), -1.0, 1.0))


def pearson_r2(x, y) -> float:
    return pearson_r(x, y) ** 2


@dataclass
class RobustnessEntry:
    degradation: str
    method: str
    feature: str
    r: float | None
    r_squared: float | None
    n_pairs: int
    note: str = ""


@dataclass
class RobustnessReport:
    entries: list = field(default_factory=list)
    failures: list = field(default_factory=list)   # (degradation, path, error)

    def get(self, degradation, feature) -> RobustnessEntry:
        for e in self.entries:
            if e.degradation == degradation and e.feature == feature:
                return e
        raise KeyError((degradation, feature))

    def write(self, path) -> None:
        with open(Path(path), "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["degradation", "method", "feature", "r", "r_squared", "n_pairs", "note"])
            for e in self.entries:
                writer.writerow([e.degradation, e.method, e.feature,
                                 "" if e.r is None else f"{e.r:.6f}",
                                 "" if e.r_squared is None else f"{e.r_squared:.6f}",
                                 e.n_pairs, e.note])


def correlate_tables(clean, degraded, degradation: str, features=FEATURE_NAMES) -> list[RobustnessEntry]:
    """Per-feature correlation between matching rows of two feature tables."""
    by_id = {r.source_id: r for r in degraded}
    pairs = [(c, by_id[c.source_id]) for c in clean if c.source_id in by_id]
    entries = []
    for name in features:
        method = name.rsplit("_", 1)[1]
        x = [c.values.get(name) for c, _ in pairs]
        y = [d.values.get(name) for _, d in pairs]
        n = len(_pairs(x, y)[0])
        try:
            r = pearson_r(x, y)
            entries.append(RobustnessEntry(degradation, method, name, r, r * r, n))
        except InsufficientPairs:
            entries.append(RobustnessEntry(degradation, method, name, None, None, n, "insufficient"))
        except ZeroVariance:
            entries.append(RobustnessEntry(degradation, method, name, None, None, n, "zero_variance"))
    return entries


def robustness_study(entries, degradations, cfg=None, methods=None, grid=None,
                     n_jobs: int = 1, workdir=None) -> RobustnessReport:
    """Extract features from clean and degraded audio and correlate them.

    ``entries`` is a manifest (list of ManifestEntry). Extraction settings are
    identical for both passes; the noise stream for recording i is seeded by
    (spec.rng_seed, i).
    """
    from .extractors import METHODS
    from .features import STATS
    from .pipeline import extract_corpus

    features = [f"{s}_{m}" for m in (methods or METHODS) for s in STATS]
    clean, _ = extract_corpus(entries, cfg=cfg, methods=methods, grid=grid, n_jobs=n_jobs)
    report = RobustnessReport()
    for spec in degradations:
        if spec.kind == "external_codec":
            try:
                probe_codec(spec, workdir)
            except CodecUnavailable as exc:
                log.warning("%s degradation skipped: %s", spec.name, exc)
                report.failures.append((spec.name, "", str(exc)))
                continue

        def transform(clip, index, spec=spec):
            return apply_degradation(clip, spec, workdir, index)
        degraded, failures = extract_corpus(entries, cfg=cfg, methods=methods, grid=grid,
                                            n_jobs=n_jobs, transform=transform)
        report.failures.extend((spec.name, path, err) for path, err in failures)
        report.entries.extend(correlate_tables(clean, degraded, spec.name, features))
    return report
