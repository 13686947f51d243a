"""Distribution derivative method (DDM) for linear-FM sinusoid parameters.

Within a frame the dominant component is modelled as
``exp(a0 + a1*t + a2*t**2)`` with complex coefficients. For a test function
``psi`` that vanishes at the frame edges, integration by parts gives
``<x', psi> = -<x, psi'>``; substituting ``x' = (a1 + 2*a2*t) x`` and using
windowed exponentials at two bins yields a 2x2 linear system in (a1, a2).
"""
from __future__ import annotations

import numpy as np

from ..spectral import AnalysisConfig, amplitude_scale, peak_bins
from .common import Atom, centred_time, voiced_frames, window_derivative

MAX_CONDITION = 1e8


def ddm_transforms(segments: np.ndarray, cfg: AnalysisConfig):
    """Spectra of x*w, x*t*w and x*w' (t in samples from the frame centre)."""
    w = cfg.window_array()
    t = centred_time(cfg.frame_size)
    xw = np.fft.rfft(segments * w, axis=1)
    xtw = np.fft.rfft(segments * (t * w), axis=1)
    xdw = np.fft.rfft(segments * window_derivative(w), axis=1)
    return xw, xtw, xdw


def solve_ddm(xw, xtw, xdw, bins_a, bins_b, frame_size):
    """Solve for (a1, a2) per frame, in per-sample units, using two bins each.

    Returns (a1, a2, condition_number).
    """
    rows = np.arange(len(xw))
    A = np.empty((len(xw), 2, 2), dtype=complex)
    b = np.empty((len(xw), 2), dtype=complex)
    for j, m in enumerate((bins_a, bins_b)):
        omega = 2.0 * np.pi * m / frame_size
        A[:, j, 0] = xw[rows, m]
        A[:, j, 1] = 2.0 * xtw[rows, m]
        b[:, j] = -xdw[rows, m] + 1j * omega * xw[rows, m]
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(A)
    ok = np.isfinite(cond) & (cond <= MAX_CONDITION)
    coef = np.full((len(xw), 2), np.nan, dtype=complex)
    if ok.any():
        coef[ok] = np.linalg.solve(A[ok], b[ok][..., None])[..., 0]
    return coef[:, 0], coef[:, 1], cond


def extract_dd(clip, cfg: AnalysisConfig = AnalysisConfig()) -> list[Atom]:
    """One atom per selected frame from the DDM estimate at the peak bin.

    Frames whose system is ill-conditioned, silent, or whose estimated
    frequency falls outside the analysis band are skipped.
    """
    _, top = voiced_frames(clip, cfg)
    sr, n = clip.sample_rate, cfg.frame_size
    lo, hi = cfg.band_bins(sr)
    xw, xtw, xdw = ddm_transforms(top.segments, cfg)
    mag = np.abs(xw)
    k = peak_bins(xw, lo, hi)
    rows = np.arange(len(k))
    left, right = mag[rows, k - 1], mag[rows, np.minimum(k + 1, mag.shape[1] - 1)]
    neighbour = np.where(right >= left, k + 1, k - 1)
    neighbour = np.clip(neighbour, 1, mag.shape[1] - 1)
    a1, a2, _ = solve_ddm(xw, xtw, xdw, k, neighbour, n)

    freq = a1.imag * sr / (2.0 * np.pi)
    rate = a2.imag * sr**2 / np.pi
    peak = mag[rows, k] * amplitude_scale(cfg)
    keep = ((peak > 0) & np.isfinite(freq) & np.isfinite(rate)
            & (freq >= cfg.band_low) & (freq <= cfg.band_high))
    times = top.centre_times
    return [Atom(float(times[i]), float(freq[i]), float(rate[i]), float(peak[i]), "dd")
            for i in np.flatnonzero(keep)]
