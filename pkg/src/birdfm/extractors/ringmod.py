"""Heterodyne (ring-modulation) chirplet analysis of each selected frame."""
from __future__ import annotations

import numpy as np

from ..spectral import AnalysisConfig, amplitude_scale, parabolic_offset
from .common import Atom, ChirpGrid, centred_time, voiced_frames

_BATCH = 64


def dechirp_kernels(rates: np.ndarray, frame_size: int, sample_rate: float) -> np.ndarray:
    """Unit-magnitude carriers whose frequency falls at each rate, centred mid-frame."""
    t = centred_time(frame_size) / sample_rate
    return np.exp(-1j * np.pi * rates[:, None] * t[None, :] ** 2)


def chirp_spectra(windowed: np.ndarray, kernels: np.ndarray) -> np.ndarray:
    """Magnitude spectra of each windowed frame after each de-chirp, shape (frames, rates, bins)."""
    return np.abs(np.fft.fft(windowed[:, None, :] * kernels[None, :, :], axis=-1))


def extract_rm(clip, cfg: AnalysisConfig = AnalysisConfig(),
               grid: ChirpGrid | None = None) -> list[Atom]:
    """Best (frequency, chirp rate) pair per selected frame.

    Each frame is multiplied by a de-chirping carrier for every candidate
    rate; the rate whose spectrum has the tallest in-band peak wins. Equal
    peaks resolve toward the smallest |rate|.
    """
    grid = grid or ChirpGrid.default()
    _, top = voiced_frames(clip, cfg)
    sr, n = clip.sample_rate, cfg.frame_size
    lo, hi = cfg.band_bins(sr)
    rates = grid.search_order()
    kernels = dechirp_kernels(rates, n, sr)
    w = cfg.window_array()
    scale = amplitude_scale(cfg)
    times = top.centre_times

    atoms = []
    for start in range(0, len(top), _BATCH):
        seg = top.segments[start:start + _BATCH] * w
        mag = chirp_spectra(seg, kernels)
        band = mag[:, :, lo:hi + 1].reshape(len(seg), -1)
        best = np.argmax(band, axis=1)
        ri, ki = np.divmod(best, hi - lo + 1)
        k = ki + lo
        rows = np.arange(len(seg))
        peak = mag[rows, ri, k]
        tiny = np.finfo(float).tiny
        left = np.log(np.maximum(mag[rows, ri, k - 1], tiny))
        centre = np.log(np.maximum(peak, tiny))
        right = np.log(np.maximum(mag[rows, ri, (k + 1) % n], tiny))
        pos = k + (parabolic_offset(left, centre, right) if cfg.interpolate else 0.0)
        freq = np.clip(pos * sr / n, cfg.band_low, cfg.band_high)
        for j in range(len(seg)):
            if peak[j] <= 0:
                continue
            atoms.append(Atom(float(times[start + j]), float(freq[j]), float(rates[ri[j]]),
                              float(peak[j] * scale), "rm"))
    return atoms
