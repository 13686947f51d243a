"""Frequency-modulation features for bird vocalisations.

Four extractors (``ss``, ``rm``, ``mp``, ``dd``) turn recordings into atoms
carrying frequency and FM rate; the rest of the package summarises atoms into
percentile features, ranks them, classifies species and measures robustness.
"""
from .errors import BirdFMError
from .extractors import METHODS, Atom, ChirpGrid, extract
from .features import FEATURE_NAMES, FeatureVector, read_table, summarize, write_table
from .ingest import AudioClip, ManifestEntry, load, load_manifest
from .spectral import AnalysisConfig

__all__ = [
    "AnalysisConfig", "Atom", "AudioClip", "BirdFMError", "ChirpGrid", "FEATURE_NAMES",
    "FeatureVector", "METHODS", "ManifestEntry", "extract", "load", "load_manifest",
    "read_table", "summarize", "write_table",
]

__version__ = "0.1.0"
