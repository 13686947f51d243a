from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NoVoicedFrames
from ..spectral import AnalysisConfig, Frames, select_top_frames, stft

METHODS = ("ss", "rm", "mp", "dd")


@dataclass(frozen=True, slots=True)
class Atom:
    time: float        # s, frame or atom centre
    frequency: float   # Hz
    fm_rate: float     # Hz/s, signed
    magnitude: float   # linear amplitude
    method: str


@dataclass(frozen=True)
class ChirpGrid:
    """Candidate chirp rates (Hz/s), symmetric about zero and sorted ascending."""

    rates: tuple

    def __post_init__(self):
        rates = np.asarray(self.rates, dtype=float)
        if 0.0 not in rates:
            raise ValueError("chirp grid must contain 0")
        if not np.allclose(np.sort(rates), np.sort(-rates)):
            raise ValueError("chirp grid must be symmetric about 0")
        object.__setattr__(self, "rates", tuple(np.sort(rates)))

    @classmethod
    def geometric(cls, max_rate: float = 3.0e6, n_per_side: int = 16,
                  ratio: float = 20.0 ** 0.2) -> "ChirpGrid":
        pos = max_rate / ratio ** np.arange(n_per_side - 1, -1, -1)
        return cls(tuple(np.concatenate([-pos[::-1], [0.0], pos])))

    @classmethod
    def default(cls) -> "ChirpGrid":
        # 375 Hz/s .. 3e6 Hz/s in ratio 20**(1/5); 1.5e5 is an exact member
        return cls.geometric()

    def __len__(self):
        return len(self.rates)

    def array(self) -> np.ndarray:
        return np.asarray(self.rates)

    def search_order(self) -> np.ndarray:
        """Rates ordered by |rate| so first-wins argmax prefers slower chirps."""
        r = self.array()
        return r[np.lexsort((r, np.abs(r)))]

    def bracket(self, rate: float) -> tuple[float, float]:
        """Neighbouring grid values enclosing ``rate`` (equal if it is a member)."""
        r = self.array()
        i = np.searchsorted(r, rate)
        if i < len(r) and r[i] == rate:
            return rate, rate
        return float(r[max(i - 1, 0)]), float(r[min(i, len(r) - 1)])


def voiced_frames(clip, cfg: AnalysisConfig) -> tuple[Frames, Frames]:
    """STFT the clip and return (all frames, selected top-energy frames).

    Raises NoVoicedFrames if no selected frame carries in-band energy.
    """
    frames = stft(clip, cfg)
    top = select_top_frames(frames, cfg)
    lo, hi = cfg.band_bins(clip.sample_rate)
    if not np.any(np.abs(top.spectra[:, lo:hi + 1]) > 0):
        raise NoVoicedFrames(f"{clip.source_id}: no selected frame has in-band energy")
    return frames, top


def centred_time(frame_size: int) -> np.ndarray:
    """Sample offsets relative to the frame centre."""
    return np.arange(frame_size) - frame_size / 2.0


def window_derivative(w: np.ndarray) -> np.ndarray:
    """Derivative (per sample) of a periodic window, computed spectrally."""
    n = len(w)
    k = np.fft.fftfreq(n) * n
    if n % 2 == 0:
        k[n // 2] = 0.0
    return np.real(np.fft.ifft(2j * np.pi * k / n * np.fft.fft(w)))
