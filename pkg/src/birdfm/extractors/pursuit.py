"""Greedy matching pursuit over a dictionary of Hann-windowed chirp atoms.

Atoms have the frame length and sit at half-frame time steps; their centre
frequencies are the in-band FFT bins and their chirp rates come from a
:class:`ChirpGrid`. Each atom is real with a free phase, so a selection is a
projection of the residual onto the plane spanned by its cosine and sine
forms; the removed energy is exactly that projection's energy.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..spectral import AnalysisConfig, parabolic_offset
from .common import Atom, ChirpGrid, centred_time, voiced_frames

ITERATION_CAP_FACTOR = 10
_BATCH = 256


@dataclass(frozen=True)
class ChirpDictionary:
    frame_size: int
    hop: int
    sample_rate: float
    bins: np.ndarray     # in-band FFT bin indices
    rates: np.ndarray    # Hz/s
    window: np.ndarray

    @classmethod
    def build(cls, cfg: AnalysisConfig, sample_rate: float, grid: ChirpGrid) -> "ChirpDictionary":
        lo, hi = cfg.band_bins(sample_rate)
        return cls(cfg.frame_size, cfg.frame_size // 2, sample_rate,
                   np.arange(lo, hi + 1), grid.search_order(), cfg.window_array())

    @property
    def t(self) -> np.ndarray:
        return centred_time(self.frame_size) / self.sample_rate

    def kernels(self) -> np.ndarray:
        """Window times de-chirp carrier, one row per rate."""
        return self.window[None, :] * np.exp(-1j * np.pi * self.rates[:, None] * self.t[None, :] ** 2)

    def gram_inverse(self) -> np.ndarray:
        """Inverse Gram matrices of the (cos, sin) atom pair, shape (rates, bins, 2, 2)."""
        n = self.frame_size
        w2 = self.window**2
        energy = w2.sum()
        q = np.fft.fft(w2[None, :] * np.exp(-2j * np.pi * self.rates[:, None] * self.t[None, :] ** 2),
                       axis=1)[:, (2 * self.bins) % n]
        # the (-1)**(2k) centring factor is 1
        g = np.empty(q.shape + (2, 2))
        g[..., 0, 0] = 0.5 * (energy + q.real)
        g[..., 1, 1] = 0.5 * (energy - q.real)
        g[..., 0, 1] = g[..., 1, 0] = -0.5 * q.imag
        return np.linalg.inv(g)

    def waveform(self, rate_i: int, bin_i: int, coef: np.ndarray) -> np.ndarray:
        theta = (2 * np.pi * self.bins[bin_i] * self.sample_rate / self.frame_size * self.t
                 + np.pi * self.rates[rate_i] * self.t**2)
        return self.window * (coef[0] * np.cos(theta) + coef[1] * np.sin(theta))


class _Scorer:
    """Best atom per time position, kept up to date as the residual changes."""

    def __init__(self, dic: ChirpDictionary):
        self.dic = dic
        self.kernels = dic.kernels()
        self.ginv = dic.gram_inverse()
        # centring phase (-1)**k moves the FFT phase reference to the atom centre
        self.sign = np.where(dic.bins % 2 == 0, 1.0, -1.0)

    def energies(self, segments: np.ndarray):
        """Projection energies and coefficients, shapes (seg, rate, bin) and (seg, rate, bin, 2)."""
        z = np.fft.fft(segments[:, None, :] * self.kernels[None, :, :], axis=-1)[..., self.dic.bins]
        z = z * self.sign
        v = np.stack([z.real, -z.imag], axis=-1)                       # (seg, rate, bin, 2)
        coef = np.einsum("rbij,srbj->srbi", self.ginv, v)
        energy = np.einsum("srbi,srbi->srb", v, coef)
        return energy, coef

    def score(self, segments: np.ndarray):
        """For each segment: (best energy, rate index, bin index, projection coefficients)."""
        energy, coef = self.energies(segments)
        flat = energy.reshape(len(segments), -1)
        best = np.argmax(flat, axis=1)
        ri, bi = np.divmod(best, len(self.dic.bins))
        rows = np.arange(len(segments))
        return flat[rows, best], ri, bi, coef[rows, ri, bi]


def _energy_target(top, cfg: AnalysisConfig) -> float:
    """Energy of the selected frames as segmentation measures it, in time-domain units.

    Frame energy is the windowed in-band spectral energy; dividing by N/2
    (Parseval for a one-sided spectrum) expresses it as a sum of squared
    windowed samples, comparable with the energy removed by each atom.
    """
    return float(top.energy.sum() * 2.0 / cfg.frame_size)


def _bin_offset(scorer: _Scorer, segment: np.ndarray, ri: int, bi: int) -> float:
    energy, _ = scorer.energies(segment[None, :])
    row = energy[0, ri]
    if bi == 0 or bi == len(row) - 1:
        return 0.0
    tiny = np.finfo(float).tiny
    left, centre, right = np.log(np.maximum(row[bi - 1:bi + 2], tiny))
    return float(parabolic_offset(left, centre, right))


def matching_pursuit(samples: np.ndarray, dic: ChirpDictionary, target: float, max_iter: int):
    """Run the greedy decomposition.

    Returns (atoms as (position, rate_i, bin_i, coef, bin_offset) tuples,
    per-iteration extracted energies, final residual). ``bin_offset`` is the
    log-parabolic refinement of the atom's frequency over neighbouring bins;
    the subtracted atom itself stays on the bin grid.
    """
    residual = np.array(samples, dtype=float)
    n, hop = dic.frame_size, dic.hop
    n_pos = (len(residual) - n) // hop + 1
    scorer = _Scorer(dic)
    frames = np.lib.stride_tricks.sliding_window_view(residual, n)[::hop][:n_pos]
    # A projection never holds more energy than the segment itself, so unscored
    # positions carry that bound and are scored only when it could win.
    best_e = np.einsum("pi,pi->p", frames, frames)
    scored = np.zeros(n_pos, dtype=bool)
    best_r = np.zeros(n_pos, dtype=int)
    best_b = np.zeros(n_pos, dtype=int)
    best_c = np.zeros((n_pos, 2))

    def rescore(idx):
        segs = np.stack([residual[i * hop:i * hop + n] for i in idx])
        best_e[idx], best_r[idx], best_b[idx], best_c[idx] = scorer.score(segs)
        scored[idx] = True

    total = float(residual @ residual)
    floor = 1e-12 * total
    picked, energies = [], []
    extracted = 0.0
    while len(picked) < max_iter and extracted < target:
        p = int(np.argmax(best_e))
        if not scored[p]:
            pending = np.flatnonzero(~scored)
            rescore(np.sort(pending[np.argsort(-best_e[pending], kind="stable")[:_BATCH]]))
            continue
        e = float(best_e[p])
        if e <= floor:
            break
        start = p * hop
        offset = _bin_offset(scorer, residual[start:start + n], best_r[p], best_b[p])
        residual[start:start + n] -= dic.waveform(best_r[p], best_b[p], best_c[p])
        picked.append((p, int(best_r[p]), int(best_b[p]), best_c[p].copy(), offset))
        energies.append(e)
        extracted += e
        lo_p, hi_p = max(p - (n // hop - 1), 0), min(p + (n // hop - 1), n_pos - 1)
        rescore(np.arange(lo_p, hi_p + 1))
    return picked, np.array(energies), residual


def extract_mp(clip, cfg: AnalysisConfig = AnalysisConfig(),
               grid: ChirpGrid | None = None) -> list[Atom]:
    """Decompose the clip until the extracted energy matches the in-band
    energy of the top-energy frames, or 10 atoms per selected frame."""
    grid = grid or ChirpGrid.default()
    _, top = voiced_frames(clip, cfg)
    sr = clip.sample_rate
    dic = ChirpDictionary.build(cfg, sr, grid)
    target = _energy_target(top, cfg)
    picked, _, _ = matching_pursuit(clip.samples, dic, target, ITERATION_CAP_FACTOR * len(top))
    atoms = []
    for p, ri, bi, coef, offset in picked:
        centre = (p * dic.hop + dic.frame_size / 2) / sr
        pos = dic.bins[bi] + (offset if cfg.interpolate else 0.0)
        freq = float(np.clip(pos * sr / dic.frame_size, cfg.band_low, cfg.band_high))
        atoms.append(Atom(float(centre), float(freq), float(dic.rates[ri]),
                          float(np.hypot(*coef)), "mp"))
    atoms.sort(key=lambda a: (a.time, a.frequency))
    return atoms
