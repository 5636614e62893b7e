import struct
import wave

import numpy as np
import pytest

from hindicapt.audio import (
    AudioBuffer,
    AugmentSpec,
    MelConfig,
    apply_gain_db,
    change_speed,
    enforce_duration,
    hz_to_mel,
    mel_center_frequencies,
    mel_spectrogram,
    read_wav,
    resample,
    write_wav,
)
from hindicapt.errors import AudioTooShort, MalformedWav, UnsupportedWav


def rand_buffer(n=8000, seed=0, rate=8000):
    rng = np.random.default_rng(seed)
    return AudioBuffer(rng.integers(-30000, 30000, size=n, dtype=np.int16), rate)


def test_wav_round_trip(tmp_path):
    buf = rand_buffer()
    path = tmp_path / "x.wav"
    write_wav(path, buf)
    again = read_wav(path)
    assert again.sample_rate == 8000
    assert np.array_equal(again.samples, buf.samples)


def test_rejects_stereo(tmp_path):
    path = tmp_path / "stereo.wav"
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(2)
        wf.setsampwidth(2)
        wf.setframerate(44100)
        wf.writeframes(b"\x00\x00" * 200)
    with pytest.raises(UnsupportedWav):
        read_wav(path)


def test_rejects_8bit(tmp_path):
    path = tmp_path / "8bit.wav"
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(1)
        wf.setframerate(8000)
        wf.writeframes(b"\x00" * 100)
    with pytest.raises(UnsupportedWav):
        read_wav(path)


def test_truncated_data_chunk(tmp_path):
    path = tmp_path / "trunc.wav"
    buf = rand_buffer(4000)
    write_wav(path, buf)
    raw = bytearray(path.read_bytes())
    # inflate the data chunk size field far past the actual file size
    data_pos = raw.find(b"data")
    raw[data_pos + 4 : data_pos + 8] = struct.pack("<I", 10**9)
    path.write_bytes(bytes(raw))
    with pytest.raises(MalformedWav):
        read_wav(path)


def test_garbage_header(tmp_path):
    path = tmp_path / "garbage.wav"
    path.write_bytes(b"RIFF\x00\x00")
    with pytest.raises(MalformedWav):
        read_wav(path)


def test_gain_zero_is_identity():
    buf = rand_buffer()
    out, clipped = apply_gain_db(buf, 0.0)
    assert clipped == 0
    assert np.array_equal(out.samples, buf.samples)


def test_gain_plus_5db_on_1000():
    buf = AudioBuffer(np.array([1000], dtype=np.int16))
    out, clipped = apply_gain_db(buf, 5.0)
    assert out.samples[0] == 1778
    assert clipped == 0


def test_gain_round_trip_within_one_lsb():
    # exhaustive over the range that cannot clip at +5 dB
    samples = np.arange(-18000, 18001, dtype=np.int16)
    buf = AudioBuffer(samples)
    up, clipped_up = apply_gain_db(buf, 5.0)
    down, clipped_down = apply_gain_db(up, -5.0)
    assert clipped_up == 0 and clipped_down == 0
    assert int(np.max(np.abs(down.samples.astype(np.int32) - samples.astype(np.int32)))) <= 1


def test_gain_counts_clipped_samples():
    buf = AudioBuffer(np.array([30000, -30000, 10], dtype=np.int16))
    out, clipped = apply_gain_db(buf, 5.0)
    assert clipped == 2
    assert out.samples[0] == 32767 and out.samples[1] == -32768


def test_speed_identity():
    buf = rand_buffer()
    out = change_speed(buf, 1.0)
    assert np.array_equal(out.samples, buf.samples)


def test_speed_output_length():
    buf = rand_buffer(8000)
    assert len(change_speed(buf, 1.1)) == 7273
    assert len(change_speed(buf, 0.9)) == round(8000 / 0.9)


def test_speed_constant_signal():
    buf = AudioBuffer(np.full(4000, 500, dtype=np.int16))
    for factor in (0.9, 1.0, 1.1, 1.5):
        out = change_speed(buf, factor)
        assert np.all(out.samples == 500)


def test_speed_preserves_envelope():
    buf = rand_buffer(5000, seed=3)
    lo, hi = int(buf.samples.min()), int(buf.samples.max())
    for factor in (0.9, 1.1):
        out = change_speed(buf, factor)
        assert out.samples.min() >= lo and out.samples.max() <= hi


def test_resample_changes_rate_and_length():
    buf = rand_buffer(16000, rate=16000)
    out = resample(buf, 8000)
    assert out.sample_rate == 8000
    assert len(out) == 8000


def test_enforce_duration():
    short = rand_buffer(1000)  # 0.125 s
    with pytest.raises(AudioTooShort):
        enforce_duration(short)
    long = rand_buffer(9 * 8000)
    cut = enforce_duration(long)
    assert len(cut) == 8 * 8000
    ok = rand_buffer(8000)
    assert enforce_duration(ok) is ok


def test_augment_spec_ranges():
    AugmentSpec(gain_db=5.0, speed_factor=0.9)
    with pytest.raises(ValueError):
        AugmentSpec(gain_db=6.0)
    with pytest.raises(ValueError):
        AugmentSpec(speed_factor=0.5)


def test_mel_frame_count():
    buf = rand_buffer(8000)
    spec = mel_spectrogram(buf, MelConfig(win_length=200, hop_length=80))
    assert spec.frames.shape == (98, 64)
    assert spec.frame_hop_seconds == pytest.approx(0.01)


def test_mel_empty_for_short_audio():
    buf = rand_buffer(100)
    spec = mel_spectrogram(buf)
    assert spec.frames.shape == (0, 64)


def test_mel_silence_is_log_eps():
    buf = AudioBuffer(np.zeros(8000, dtype=np.int16))
    cfg = MelConfig()
    spec = mel_spectrogram(buf, cfg)
    assert np.allclose(spec.frames, np.log(cfg.eps))


def test_mel_pure_tone_peaks_at_nearest_center():
    t = np.arange(8000) / 8000.0
    tone = (10000 * np.sin(2 * np.pi * 1000.0 * t)).astype(np.int16)
    cfg = MelConfig()
    spec = mel_spectrogram(AudioBuffer(tone), cfg)
    centers = mel_center_frequencies(cfg)
    expect_bin = int(np.argmin(np.abs(centers - 1000.0)))
    mean_energy = spec.frames.mean(axis=0)
    assert abs(int(np.argmax(mean_energy)) - expect_bin) <= 1


def test_mel_shift_covariance():
    buf = rand_buffer(8000, seed=11)
    cfg = MelConfig(win_length=200, hop_length=80)
    full = mel_spectrogram(buf, cfg)
    shifted = mel_spectrogram(AudioBuffer(buf.samples[80:].copy()), cfg)
    assert np.array_equal(full.frames[1 : shifted.frames.shape[0] + 1], shifted.frames)


def test_mel_monotone_center_frequencies():
    centers = mel_center_frequencies(MelConfig())
    assert np.all(np.diff(centers) > 0)
    assert hz_to_mel(0) == 0.0
