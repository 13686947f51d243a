"""Audio decoding, canonicalisation and corpus manifests."""
from __future__ import annotations

import csv
import struct
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy.io.wavfile
from scipy.signal import resample_poly

from .errors import DuplicatePath, EmptyClip, MissingColumn, UnreadableFile, UnsupportedEncoding

CANONICAL_RATE = 48000
MAX_DURATION = 300.0  # seconds

# Kaiser beta for roughly 90 dB stopband attenuation: 0.1102 * (A - 8.7)
KAISER_BETA = 0.1102 * (90.0 - 8.7)

_PCM = 0x0001
_FLOAT = 0x0003
_EXTENSIBLE = 0xFFFE


@dataclass(frozen=True)
class AudioClip:
    samples: np.ndarray
    sample_rate: int
    source_id: str = ""

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    species: str
    extra: dict = field(default_factory=dict, compare=False)


def _wav_format_tag(path: Path) -> int:
    """Return the WAVE format tag, resolving WAVE_FORMAT_EXTENSIBLE to its subformat."""
    try:
        with open(path, "rb") as fh:
            header = fh.read(12)
            if len(header) < 12 or header[:4] not in (b"RIFF", b"RIFX") or header[8:12] != b"WAVE":
                raise UnreadableFile(f"{path}: not a RIFF/WAVE file")
            endian = "<" if header[:4] == b"RIFF" else ">"
            while True:
                chunk = fh.read(8)
                if len(chunk) < 8:
                    raise UnreadableFile(f"{path}: no fmt chunk")
                cid, size = chunk[:4], struct.unpack(endian + "I", chunk[4:])[0]
                if cid == b"fmt ":
                    fmt = fh.read(size)
                    if len(fmt) < 16:
                        raise UnreadableFile(f"{path}: truncated fmt chunk")
                    tag = struct.unpack(endian + "H", fmt[:2])[0]
                    if tag == _EXTENSIBLE and len(fmt) >= 26:
                        tag = struct.unpack(endian + "H", fmt[24:26])[0]
                    return tag
                fh.seek(size + (size & 1), 1)
    except OSError as exc:
        raise UnreadableFile(f"{path}: {exc}") from exc


def _to_float(data: np.ndarray) -> np.ndarray:
    if data.dtype == np.uint8:
        return (data.astype(np.float64) - 128.0) / 128.0
    if data.dtype == np.int16:
        return data.astype(np.float64) / 2.0**15
    if data.dtype == np.int32:
        # 24-bit payloads arrive left-justified in int32, so one scale fits both
        return data.astype(np.float64) / 2.0**31
    if data.dtype in (np.float32, np.float64):
        return data.astype(np.float64)
    raise UnsupportedEncoding(f"sample type {data.dtype} not supported")


def decode(path) -> AudioClip:
    """Read a PCM or IEEE-float WAV file and mix it down to mono.

    No gain is applied: integer PCM is scaled by 1/2**(bits-1) so that
    full scale maps to 1.0.
    """
    path = Path(path)
    if not path.is_file():
        raise UnreadableFile(f"{path}: no such file")
    tag = _wav_format_tag(path)
    if tag not in (_PCM, _FLOAT):
        raise UnsupportedEncoding(f"{path}: WAVE format tag 0x{tag:04x} is not PCM")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.io.wavfile.WavFileWarning)
            rate, data = scipy.io.wavfile.read(path)
    except ValueError as exc:
        raise UnreadableFile(f"{path}: {exc}") from exc
    samples = _to_float(data)
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    return AudioClip(samples, int(rate), str(path))


def resample(samples: np.ndarray, rate_in: int, rate_out: int) -> np.ndarray:
    """Polyphase windowed-sinc resampling with a Kaiser-window lowpass."""
    if rate_in == rate_out:
        return samples
    ratio = Fraction(rate_out, rate_in)
    return resample_poly(samples, ratio.numerator, ratio.denominator,
                         window=("kaiser", KAISER_BETA))


def canonicalize(clip: AudioClip, rate: int = CANONICAL_RATE,
                 max_duration: float = MAX_DURATION) -> AudioClip:
    """Resample to 48 kHz, keep the first five minutes, clamp to [-1, 1]."""
    if len(clip.samples) == 0:
        raise EmptyClip(f"{clip.source_id}: zero samples")
    samples = resample(np.asarray(clip.samples, dtype=np.float64), clip.sample_rate, rate)
    samples = samples[: int(round(max_duration * rate))]
    samples = np.clip(samples, -1.0, 1.0)
    return AudioClip(samples, rate, clip.source_id)


def load(path) -> AudioClip:
    return canonicalize(decode(path))


def load_manifest(path) -> list[ManifestEntry]:
    """Parse a comma- or tab-separated manifest with `path` and `species` columns.

    Relative paths are resolved against the manifest's directory.
    Existence of the audio files is not checked here.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise MissingColumn(f"{path}: empty manifest")
    delimiter = "\t" if "\t" in lines[0] and "," not in lines[0] else ","
    reader = csv.DictReader(lines, delimiter=delimiter)
    fields = [f.strip() for f in (reader.fieldnames or [])]
    for col in ("path", "species"):
        if col not in fields:
            raise MissingColumn(f"{path}: manifest lacks a '{col}' column")
    reader.fieldnames = fields

    entries = []
    seen = set()
    for lineno, row in enumerate(reader, start=2):
        raw = (row.get("path") or "").strip()
        species = (row.get("species") or "").strip()
        if not raw and not species:
            continue
        if not species:
            raise MissingColumn(f"{path}:{lineno}: empty species label")
        if raw in seen:
            raise DuplicatePath(f"{path}:{lineno}: '{raw}' listed twice")
        seen.add(raw)
        audio = Path(raw)
        if not audio.is_absolute():
            audio = path.parent / audio
        extra = {k: v for k, v in row.items() if k not in ("path", "species") and k is not None}
        entries.append(ManifestEntry(audio, species, extra))
    return entries


def write_manifest(entries, path) -> None:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["path", "species"])
        for e in entries:
            p = Path(e.path)
            try:
                p = p.relative_to(path.parent)
            except ValueError:
                pass
            writer.writerow([str(p), e.species])


def write_wav(path, samples: np.ndarray, rate: int = CANONICAL_RATE) -> None:
    """Write mono 32-bit float WAV (lossless for any float32-representable clip)."""
    scipy.io.wavfile.write(path, rate, np.asarray(samples, dtype=np.float32))
