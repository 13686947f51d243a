"""Framing, short-time Fourier analysis, peak picking and energy segmentation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

from .errors import ClipTooShort, NoInBandEnergy


@dataclass(frozen=True)
class AnalysisConfig:
    """Shared analysis settings for every extractor.

    ``energy_band`` chooses whether frame energy (used for segmentation) is
    measured over the analysis band ("inband") or all bins ("full").
    """

    frame_size: int = 512
    hop_size: int = 512
    window: str = "hann"
    band_low: float = 2000.0
    band_high: float = 10000.0
    energy_fraction: float = 0.10
    energy_band: str = "inband"
    interpolate: bool = True

    def validate(self, sample_rate: float | None = None) -> "AnalysisConfig":
        if self.frame_size <= 0 or not (0 < self.hop_size <= self.frame_size):
            raise ValueError("need 0 < hop_size <= frame_size")
        if not (0 <= self.band_low < self.band_high):
            raise ValueError("need 0 <= band_low < band_high")
        if sample_rate is not None and self.band_high > sample_rate / 2:
            raise ValueError(f"band_high {self.band_high} above Nyquist for {sample_rate} Hz")
        if not (0 < self.energy_fraction <= 1):
            raise ValueError("energy_fraction must lie in (0, 1]")
        if self.energy_band not in ("inband", "full"):
            raise ValueError("energy_band must be 'inband' or 'full'")
        return self

    def window_array(self) -> np.ndarray:
        # periodic (DFT-even) form
        return get_window(self.window, self.frame_size, fftbins=True)

    def bin_hz(self, sample_rate: float) -> float:
        return sample_rate / self.frame_size

    def band_bins(self, sample_rate: float) -> tuple[int, int]:
        """Inclusive range of rfft bins whose centre lies in the analysis band."""
        df = self.bin_hz(sample_rate)
        lo = int(math.ceil(self.band_low / df - 1e-9))
        hi = int(math.floor(self.band_high / df + 1e-9))
        return lo, min(hi, self.frame_size // 2)


@dataclass(frozen=True)
class FrameSpectrum:
    frame_index: int
    start_time: float
    bins: np.ndarray
    energy: float
    sample_rate: float = 48000.0


class Frames:
    """A sequence of analysed frames from one clip, stored as arrays.

    Indexing yields :class:`FrameSpectrum` objects; ``take`` returns a
    sub-sequence that keeps the original frame indices.
    """

    def __init__(self, index, spectra, energy, segments, sample_rate, cfg):
        self.index = np.asarray(index, dtype=np.int64)
        self.spectra = spectra
        self.energy = energy
        self.segments = segments  # un-windowed frame samples, shape (n, frame_size)
        self.sample_rate = sample_rate
        self.cfg = cfg

    def __len__(self):
        return len(self.index)

    def __getitem__(self, i) -> FrameSpectrum:
        return FrameSpectrum(int(self.index[i]), float(self.start_times[i]),
                             self.spectra[i], float(self.energy[i]), self.sample_rate)

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def start_times(self) -> np.ndarray:
        return self.index * self.cfg.hop_size / self.sample_rate

    @property
    def centre_times(self) -> np.ndarray:
        return self.start_times + 0.5 * self.cfg.frame_size / self.sample_rate

    def take(self, positions) -> "Frames":
        positions = np.asarray(positions, dtype=np.int64)
        return Frames(self.index[positions], self.spectra[positions], self.energy[positions],
                      self.segments[positions], self.sample_rate, self.cfg)


def frame_signal(samples: np.ndarray, frame_size: int, hop_size: int) -> np.ndarray:
    n = (len(samples) - frame_size) // hop_size + 1
    if n <= 0:
        return np.empty((0, frame_size))
    return np.lib.stride_tricks.sliding_window_view(samples, frame_size)[::hop_size][:n]


def stft(clip, cfg: AnalysisConfig = AnalysisConfig()) -> Frames:
    """Hann-windowed STFT; trailing partial frames are dropped."""
    cfg.validate(clip.sample_rate)
    samples = np.asarray(clip.samples, dtype=np.float64)
    if len(samples) < cfg.frame_size:
        raise ClipTooShort(f"{len(samples)} samples < frame size {cfg.frame_size}")
    segments = frame_signal(samples, cfg.frame_size, cfg.hop_size)
    spectra = np.fft.rfft(segments * cfg.window_array(), axis=1)
    power = spectra.real**2 + spectra.imag**2
    if cfg.energy_band == "inband":
        lo, hi = cfg.band_bins(clip.sample_rate)
        energy = power[:, lo:hi + 1].sum(axis=1)
    else:
        energy = power.sum(axis=1)
    return Frames(np.arange(len(segments)), spectra, energy, segments, clip.sample_rate, cfg)


def n_selected(n_frames: int, fraction: float) -> int:
    # guard against 0.1 * 30 = 3.0000000000000004
    return max(1, int(math.ceil(round(fraction * n_frames, 9))))


# frame energies closer than this (relative to the loudest frame) count as ties
ENERGY_TIE_TOLERANCE = 1e-6


def select_top_frames(frames: Frames, cfg: AnalysisConfig = AnalysisConfig()) -> Frames:
    """Keep the ceil(fraction * N) highest-energy frames, in temporal order.

    Equal energies are ranked toward the earlier frame.
    """
    if len(frames) == 0:
        raise ValueError("no frames to select from")
    k = n_selected(len(frames), cfg.energy_fraction)
    peak = frames.energy.max()
    level = np.round(frames.energy / (peak * ENERGY_TIE_TOLERANCE)) if peak > 0 else frames.energy
    order = np.lexsort((frames.index, -level))
    return frames.take(np.sort(order[:k]))


def parabolic_offset(left, centre, right):
    """Vertex offset (in bins) of the parabola through three log-magnitudes."""
    denom = left - 2.0 * centre + right
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(denom < 0, 0.5 * (left - right) / denom, 0.0)
    return np.clip(d, -0.5, 0.5)


def _log_mag(mag):
    tiny = np.finfo(float).tiny
    return np.log(np.maximum(mag, tiny))


def peak_bins(spectra: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """Index of the largest-magnitude bin in [lo, hi] for each row."""
    return lo + np.argmax(np.abs(spectra[..., lo:hi + 1]), axis=-1)


def refine_peaks(spectra: np.ndarray, k: np.ndarray, interpolate: bool = True) -> np.ndarray:
    """Fractional bin positions of the peaks ``k`` via log-parabolic interpolation."""
    k = np.asarray(k)
    if not interpolate:
        return k.astype(float)
    n_bins = spectra.shape[-1]
    rows = np.arange(spectra.shape[0])
    mag = np.abs(spectra)
    km = np.clip(k - 1, 0, n_bins - 1)
    kp = np.clip(k + 1, 0, n_bins - 1)
    d = parabolic_offset(_log_mag(mag[rows, km]), _log_mag(mag[rows, k]), _log_mag(mag[rows, kp]))
    edge = (k == 0) | (k == n_bins - 1)
    return k + np.where(edge, 0.0, d)


def peak_frequencies(frames: Frames) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised peak picking over a frame set.

    Returns (frequency_hz, peak_bin, voiced_mask); frames without in-band
    energy are flagged False in the mask and their frequency is NaN.
    """
    cfg, sr = frames.cfg, frames.sample_rate
    lo, hi = cfg.band_bins(sr)
    if len(frames) == 0:
        return np.empty(0), np.empty(0, dtype=int), np.empty(0, dtype=bool)
    inband = np.abs(frames.spectra[:, lo:hi + 1])
    voiced = inband.max(axis=1) > 0
    k = lo + np.argmax(inband, axis=1)
    pos = refine_peaks(frames.spectra, k, cfg.interpolate)
    freq = np.clip(pos * cfg.bin_hz(sr), cfg.band_low, cfg.band_high)
    return np.where(voiced, freq, np.nan), k, voiced


def peak_frequency(frame: FrameSpectrum, cfg: AnalysisConfig = AnalysisConfig()) -> float:
    sample_rate = frame.sample_rate
    lo, hi = cfg.band_bins(sample_rate)
    spectrum = np.asarray(frame.bins)[None, :]
    if not np.any(np.abs(spectrum[0, lo:hi + 1]) > 0):
        raise NoInBandEnergy(f"frame {frame.frame_index} has no in-band energy")
    k = peak_bins(spectrum, lo, hi)
    pos = refine_peaks(spectrum, k, cfg.interpolate)[0]
    return float(np.clip(pos * cfg.bin_hz(sample_rate), cfg.band_low, cfg.band_high))


def amplitude_scale(cfg: AnalysisConfig) -> float:
    """Factor converting a windowed-spectrum peak magnitude into sinusoid amplitude."""
    return 2.0 / cfg.window_array().sum()
