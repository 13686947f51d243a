"""The four FM analysis methods.

Each maps a canonical clip to a list of :class:`Atom` objects carrying time,
frequency, signed FM rate and magnitude:

* ``ss`` - simple spectrographic peak tracking (:func:`extract_ss`)
* ``rm`` - heterodyne chirplet analysis (:func:`extract_rm`)
* ``mp`` - matching pursuit over chirp atoms (:func:`extract_mp`)
* ``dd`` - distribution derivative method (:func:`extract_dd`)
"""
from ..spectral import AnalysisConfig
from .common import METHODS, Atom, ChirpGrid, voiced_frames
from .ddm import extract_dd
from .pursuit import extract_mp
from .ringmod import extract_rm
from .ss import extract_ss


def extract(clip, method: str, cfg: AnalysisConfig = AnalysisConfig(),
            grid: ChirpGrid | None = None) -> list[Atom]:
    if method == "ss":
        return extract_ss(clip, cfg)
    if method == "rm":
        return extract_rm(clip, cfg, grid)
    if method == "mp":
        return extract_mp(clip, cfg, grid)
    if method == "dd":
        return extract_dd(clip, cfg)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


__all__ = ["METHODS", "Atom", "ChirpGrid", "extract", "extract_dd", "extract_mp",
           "extract_rm", "extract_ss", "voiced_frames"]
