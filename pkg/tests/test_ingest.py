import numpy as np
import pytest
import scipy.io.wavfile
from hypothesis import given, strategies as st

from birdfm.errors import DuplicatePath, EmptyClip, MissingColumn, UnreadableFile, UnsupportedEncoding
from birdfm.ingest import AudioClip, canonicalize, decode, load, load_manifest, resample, write_wav

from conftest import sine


def dominant_hz(x, fs):
    # zero-padded FFT of a long Hann-windowed stretch, then parabolic refinement
    n = len(x)
    spec = np.abs(np.fft.rfft(x * np.hanning(n), 16 * n))
    k = int(np.argmax(spec))
    a, b, c = np.log(spec[k - 1:k + 2])
    return (k + 0.5 * (a - c) / (a - 2 * b + c)) * fs / (16 * n)


def test_mono_passthrough(tmp_path):
    x = sine(1000, 4800)
    write_wav(tmp_path / "a.wav", x, 48000)
    clip = decode(tmp_path / "a.wav")
    assert clip.sample_rate == 48000 and len(clip.samples) == 4800
    np.testing.assert_allclose(clip.samples, x.astype(np.float32))


def test_stereo_mixdown_is_channel_mean(tmp_path):
    rng = np.random.default_rng(1)
    c = (rng.integers(-2**15, 2**15, size=(1000, 2))).astype(np.int16)
    scipy.io.wavfile.write(tmp_path / "s.wav", 44100, c)
    clip = decode(tmp_path / "s.wav")
    expect = (c[:, 0] / 2**15 + c[:, 1] / 2**15) / 2
    np.testing.assert_allclose(clip.samples, expect, atol=1e-12)


@given(st.lists(st.integers(-2**15, 2**15 - 1), min_size=2, max_size=200))
def test_duplicated_mono_mixdown_exact(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("dup") / "d.wav"
    v = np.array(values, dtype=np.int16)
    scipy.io.wavfile.write(path, 48000, np.stack([v, v], axis=1))
    np.testing.assert_array_equal(decode(path).samples, v / 2**15)


def test_24bit_scaling(tmp_path):
    # 24-bit PCM packed by hand: full-scale negative and half scale
    import struct
    vals = [-(2**23), 2**22, 0]
    data = b"".join(struct.pack("<i", v)[:3] for v in vals)
    fmt = struct.pack("<HHIIHH", 1, 1, 48000, 48000 * 3, 3, 24)
    body = b"WAVE" + b"fmt " + struct.pack("<I", 16) + fmt + b"data" + struct.pack("<I", len(data)) + data
    (tmp_path / "p.wav").write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)
    np.testing.assert_allclose(decode(tmp_path / "p.wav").samples, [-1.0, 0.5, 0.0])


def test_garbage_is_unreadable(tmp_path):
    (tmp_path / "g.wav").write_bytes(b"not a wav file at all")
    with pytest.raises(UnreadableFile):
        decode(tmp_path / "g.wav")
    with pytest.raises(UnreadableFile):
        decode(tmp_path / "missing.wav")


def test_non_pcm_is_unsupported(tmp_path):
    import struct
    fmt = struct.pack("<HHIIHH", 6, 1, 8000, 8000, 1, 8)  # A-law
    data = bytes(100)
    body = b"WAVE" + b"fmt " + struct.pack("<I", 16) + fmt + b"data" + struct.pack("<I", len(data)) + data
    (tmp_path / "alaw.wav").write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)
    with pytest.raises(UnsupportedEncoding):
        decode(tmp_path / "alaw.wav")


def test_canonical_noop_is_bit_identical():
    x = np.random.default_rng(0).uniform(-1, 1, 48000 * 10)
    out = canonicalize(AudioClip(x, 48000, "x"))
    assert out.sample_rate == 48000
    np.testing.assert_array_equal(out.samples, x)


def test_resampled_tone_keeps_frequency():
    x = sine(1000, 44100, fs=44100)
    out = canonicalize(AudioClip(x, 44100, "t"))
    assert out.sample_rate == 48000 and len(out.samples) == 48000
    assert abs(dominant_hz(out.samples[4800:-4800], 48000) - 1000) < 1


def test_truncation_to_five_minutes():
    clip = AudioClip(np.zeros(48000 * 400, dtype=np.float32), 48000, "long")
    assert len(canonicalize(clip).samples) == 14_400_000


def test_empty_clip():
    with pytest.raises(EmptyClip):
        canonicalize(AudioClip(np.zeros(0), 48000, "e"))


def test_clamped_to_unit_range():
    out = canonicalize(AudioClip(np.array([2.0, -3.0, 0.5]), 48000, "c"))
    np.testing.assert_array_equal(out.samples, [1.0, -1.0, 0.5])


@given(st.sampled_from([8000, 16000, 22050, 32000, 44100, 96000]),
       st.floats(0, 1))
def test_resampling_preserves_tones(rate_in, u):
    f = 100 + u * (min(20000, rate_in / 2.5) - 100)
    x = sine(f, rate_in // 2, fs=rate_in)
    y = resample(x, rate_in, 48000)
    assert abs(dominant_hz(y[2400:-2400], 48000) - f) < 1


@given(st.sampled_from([22050, 44100, 48000]), st.integers(0, 2**16))
def test_canonicalize_idempotent(rate, seed):
    x = np.random.default_rng(seed).uniform(-1, 1, 2000)
    once = canonicalize(AudioClip(x, rate, "i"))
    twice = canonicalize(once)
    np.testing.assert_array_equal(once.samples, twice.samples)
    assert abs(np.max(np.abs(once.samples))) <= 1.0


def test_load_manifest(tmp_path):
    (tmp_path / "m.csv").write_text("path,species,site\nb.wav,wren,x\na.wav,robin,y\n")
    entries = load_manifest(tmp_path / "m.csv")
    assert [e.path.name for e in entries] == ["b.wav", "a.wav"]
    assert entries[0].path == tmp_path / "b.wav" and entries[1].species == "robin"
    assert entries[0].extra == {"site": "x"}


def test_manifest_tab_delimited(tmp_path):
    (tmp_path / "m.tsv").write_text("species\tpath\nwren\t/abs/x.wav\n")
    [e] = load_manifest(tmp_path / "m.tsv")
    assert str(e.path) == "/abs/x.wav" and e.species == "wren"


def test_manifest_errors(tmp_path):
    (tmp_path / "a.csv").write_text("path,label\nx.wav,a\n")
    with pytest.raises(MissingColumn):
        load_manifest(tmp_path / "a.csv")
    (tmp_path / "b.csv").write_text("path,species\nx.wav,a\nx.wav,b\n")
    with pytest.raises(DuplicatePath):
        load_manifest(tmp_path / "b.csv")


def test_load_roundtrip(tmp_path):
    x = sine(3000, 22050, fs=22050)
    write_wav(tmp_path / "r.wav", x, 22050)
    clip = load(tmp_path / "r.wav")
    assert clip.sample_rate == 48000 and len(clip.samples) == 48000
