"""Simple spectrographic FM: frame-to-frame jumps of the in-band peak frequency."""
from __future__ import annotations

import numpy as np

from ..spectral import AnalysisConfig, amplitude_scale, peak_frequencies
from .common import Atom, voiced_frames

# Peak estimates are reported to this resolution; finer digits are numerical
# noise (e.g. image-leakage jitter on a steady tone) and would turn into
# spurious non-zero jumps.
PEAK_RESOLUTION_HZ = 1e-3


def extract_ss(clip, cfg: AnalysisConfig = AnalysisConfig()) -> list[Atom]:
    """One atom per pair of selected frames that are adjacent in the clip.

    The atom takes the later frame's peak frequency and magnitude; its FM rate
    is the peak-frequency jump divided by the hop duration. Pairs straddling
    an unselected frame are not bridged.
    """
    _, top = voiced_frames(clip, cfg)
    freq, k, voiced = peak_frequencies(top)
    freq = np.round(freq / PEAK_RESOLUTION_HZ) * PEAK_RESOLUTION_HZ
    mag = np.abs(top.spectra[np.arange(len(top)), k]) * amplitude_scale(cfg)
    hop_s = cfg.hop_size / clip.sample_rate
    times = top.centre_times

    pair = (np.diff(top.index) == 1) & voiced[:-1] & voiced[1:]
    later = np.flatnonzero(pair) + 1
    rates = (freq[later] - freq[later - 1]) / hop_s
    return [Atom(float(times[i]), float(freq[i]), float(r), float(mag[i]), "ss")
            for i, r in zip(later, rates)]
