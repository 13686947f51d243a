"""Synthetic test signals and labelled corpora with known FM content."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ingest import CANONICAL_RATE, AudioClip, ManifestEntry, write_manifest, write_wav


def tone(freq: float, duration: float, amp: float = 0.5, fs: int = CANONICAL_RATE,
         phase: float = 0.0) -> np.ndarray:
    t = np.arange(int(round(duration * fs))) / fs
    return amp * np.sin(2 * np.pi * freq * t + phase)


def linear_chirp(centre: float, rate: float, duration: float, amp: float = 0.5,
                 fs: int = CANONICAL_RATE, phase: float = 0.0) -> np.ndarray:
    """Chirp whose instantaneous frequency passes ``centre`` at its midpoint."""
    n = int(round(duration * fs))
    t = (np.arange(n) - n / 2) / fs
    return amp * np.cos(2 * np.pi * (centre * t + 0.5 * rate * t**2) + phase)


def trill(centre: float, span: float, rate: float, duration: float, amp: float = 0.5,
          fs: int = CANONICAL_RATE, phase: float = 0.0) -> np.ndarray:
    """Triangle-wave FM: frequency sweeps ``span`` Hz up and down at |rate| Hz/s."""
    n = int(round(duration * fs))
    t = np.arange(n) / fs
    period = 2.0 * span / rate
    u = (t / period + phase / (2 * np.pi)) % 1.0
    tri = np.where(u < 0.5, 4 * u - 1, 3 - 4 * u)        # -1..1
    inst = centre + 0.5 * span * tri
    return amp * np.sin(2 * np.pi * np.cumsum(inst) / fs)


def fade(x: np.ndarray, ramp: int) -> np.ndarray:
    if ramp <= 0 or 2 * ramp > len(x):
        return x
    env = np.ones(len(x))
    r = 0.5 - 0.5 * np.cos(np.pi * np.arange(ramp) / ramp)
    env[:ramp], env[-ramp:] = r, r[::-1]
    return x * env


def place_bouts(bouts, total: int, starts) -> np.ndarray:
    out = np.zeros(total)
    for b, s in zip(bouts, starts):
        out[s:s + len(b)] += b
    return out


def chirp_bursts(rate: float, centre: float = 5000.0, snr_db: float = 20.0, burst_total: int = 240,
                 max_span: float = 5500.0, amp: float = 0.5, frame: int = 512,
                 fs: int = CANONICAL_RATE, seed: int = 0) -> AudioClip:
    """Linear chirp bursts in white noise, aligned to the analysis frame grid.

    Each burst spans a whole number of frames (at most 16, and at most
    ``max_span`` Hz of sweep); about ``burst_total`` burst frames are laid
    out so that they fill exactly 10% of all frames, which makes top-energy
    segmentation select the burst frames. ``snr_db`` is the clip's signal
    power over its noise power.
    """
    rng = np.random.default_rng(seed)
    frame_s = frame / fs
    burst_frames = int(max(2, min(16, np.floor(max_span / (abs(rate) * frame_s)))))
    n_bursts = int(np.ceil(burst_total / burst_frames))
    n_frames = 10 * n_bursts * burst_frames
    total = n_frames * frame
    gap = n_frames // n_bursts
    bouts, starts = [], []
    for b in range(n_bursts):
        start_frame = b * gap + (gap - burst_frames) // 2
        bouts.append(linear_chirp(centre, rate, burst_frames * frame_s, amp, fs,
                                  phase=rng.uniform(0, 2 * np.pi)))
        starts.append(start_frame * frame)
    x = place_bouts(bouts, total, starts)
    sigma = np.sqrt(np.mean(x**2) * 10 ** (-snr_db / 10))
    x += sigma * rng.standard_normal(total)
    return AudioClip(x, fs, f"chirp_{rate:g}")


def song(kind: str, rng: np.random.Generator, duration: float = 2.0, n_bouts: int = 2,
         coverage: float = 0.14, amp: float | None = None, background_db: float = -70.0,
         fs: int = CANONICAL_RATE, **params) -> tuple[np.ndarray, dict]:
    """A clip of ``n_bouts`` vocal bouts over faint background noise.

    ``kind`` is "tone", "chirp" or "trill"; parameters not given in
    ``params`` are drawn from ``rng``. Returns (samples, parameters used).
    """
    total = int(round(duration * fs))
    bout_len = int(round(coverage * total / n_bouts))
    amp = amp if amp is not None else float(rng.uniform(0.1, 0.5))
    p = dict(params)
    if kind == "tone":
        p.setdefault("freq", float(rng.uniform(2500, 9000)))
        make = lambda ph: tone(p["freq"], bout_len / fs, amp, fs, ph)
    elif kind == "chirp":
        p.setdefault("rate", float(10 ** rng.uniform(3, 5) * rng.choice([-1, 1])))
        p.setdefault("centre", float(rng.uniform(4000, 7000)))
        # fast sweeps are split into more, shorter bouts so coverage holds
        syl = min(bout_len / fs, 5000.0 / abs(p["rate"]))
        n_bouts = max(n_bouts, int(np.ceil(coverage * total / (syl * fs))))
        make = lambda ph: linear_chirp(p["centre"], p["rate"], syl, amp, fs, ph)
    elif kind == "trill":
        p.setdefault("rate", float(10 ** rng.uniform(3.3, 5)))
        p.setdefault("span", float(rng.uniform(500, 3000)))
        p.setdefault("centre", float(rng.uniform(3500, 8000)))
        make = lambda ph: trill(p["centre"], p["span"], p["rate"], bout_len / fs, amp, fs, ph)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    slot = total // n_bouts
    bouts, starts = [], []
    for b in range(n_bouts):
        bout = fade(make(rng.uniform(0, 2 * np.pi)), int(0.005 * fs))
        bouts.append(bout)
        starts.append(b * slot + int(rng.integers(0, max(1, slot - len(bout)))))
    x = place_bouts(bouts, total, starts)
    x += 10 ** (background_db / 20) * rng.standard_normal(total)
    p.update(kind=kind, amp=amp)
    return np.clip(x, -1, 1), p


@dataclass
class Corpus:
    manifest: Path
    entries: list
    params: list


def _write_corpus(root, items, fs=CANONICAL_RATE) -> Corpus:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    entries, params = [], []
    for name, species, samples, p in items:
        path = root / f"{name}.wav"
        write_wav(path, samples, fs)
        entries.append(ManifestEntry(path, species))
        params.append(p)
    manifest = root / "manifest.csv"
    write_manifest(entries, manifest)
    return Corpus(manifest, entries, params)


def mixed_corpus(root, n: int = 50, seed: int = 0, duration: float = 2.0) -> Corpus:
    """Tones, chirps and trills in equal rotation, labelled by kind."""
    rng = np.random.default_rng(seed)
    kinds = ("tone", "chirp", "trill")
    items = []
    for i in range(n):
        kind = kinds[i % 3]
        x, p = song(kind, rng, duration)
        items.append((f"{kind}_{i:03d}", kind, x, p))
    return _write_corpus(root, items)


def two_species_corpus(root, n_per_species: int = 30, seed: int = 0, duration: float = 2.0,
                       slow_rate: float = 5e3, fast_rate: float = 5e4) -> Corpus:
    """Trills that differ between species only in FM rate.

    Centre frequency, sweep span and bout length are drawn from the same
    distributions for both species, and each clip's rate is jittered by
    +/-20%. Bouts last a whole number of sweep periods, so every bout visits
    its span uniformly whatever the rate.
    """
    rng = np.random.default_rng(seed)
    items = []
    for i in range(n_per_species):
        for species, rate in (("A", slow_rate), ("B", fast_rate)):
            r = rate * rng.uniform(0.8, 1.2)
            span = float(rng.uniform(500, 1500))
            period = 2.0 * span / r
            bout = max(1, round(rng.uniform(0.25, 0.45) / period)) * period
            x, p = song("trill", rng, duration, n_bouts=2, coverage=2 * bout / duration,
                        rate=r, span=span)
            items.append((f"{species}_{i:03d}", species, x, p))
    return _write_corpus(root, items)
