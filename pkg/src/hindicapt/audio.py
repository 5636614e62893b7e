"""Audio I/O and DSP at the corpus format: 8 kHz, 16-bit mono PCM.

Covers WAV read/write, the two augmentation transforms (gain in dB and
varispeed), linear-interpolation resampling, and log-mel spectrogram
extraction for recognizer front ends.
"""

from __future__ import annotations

import logging
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AudioTooShort, MalformedWav, UnsupportedWav

log = logging.getLogger(__name__)

CANONICAL_RATE = 8000
MAX_SECONDS = 8.0
MIN_SECONDS = 0.5

GAIN_DB_RANGE = (-5.0, 5.0)
SPEED_RANGE = (0.9, 1.1)

I16_MIN = -32768
I16_MAX = 32767


@dataclass(frozen=True)
class AudioBuffer:
    samples: np.ndarray  # int16, mono; treated as immutable
    sample_rate: int = CANONICAL_RATE

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.samples.dtype != np.int16 or self.samples.ndim != 1:
            raise ValueError("samples must be a 1-D int16 array")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_seconds(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class MelSpectrogram:
    frames: np.ndarray  # [n_frames, n_mels], log power
    frame_hop_seconds: float
    n_mels: int


@dataclass(frozen=True)
class MelConfig:
    win_length: int = 200  # 25 ms at 8 kHz
    hop_length: int = 80  # 10 ms
    n_mels: int = 64
    fmin: float = 0.0
    fmax: float = 4000.0
    eps: float = 1e-10

    def __post_init__(self):
        if self.win_length < self.hop_length:
            raise ValueError("win_length must be >= hop_length")


@dataclass(frozen=True)
class AugmentSpec:
    """One augmentation variant. ``None`` for a field means "draw uniformly
    from the legal range" when the corpus augmenter runs."""

    gain_db: float | None = None
    speed_factor: float | None = None

    def __post_init__(self):
        if self.gain_db is not None and not GAIN_DB_RANGE[0] <= self.gain_db <= GAIN_DB_RANGE[1]:
            raise ValueError(f"gain_db must lie in {GAIN_DB_RANGE}")
        if self.speed_factor is not None and not SPEED_RANGE[0] <= self.speed_factor <= SPEED_RANGE[1]:
            raise ValueError(f"speed_factor must lie in {SPEED_RANGE}")


def read_wav(path: str | Path) -> AudioBuffer:
    """Read a 16-bit mono PCM RIFF/WAVE file.

    Anything that is not 16-bit mono PCM raises UnsupportedWav; a truncated
    or size-inconsistent file raises MalformedWav.
    """
    try:
        with wave.open(str(path), "rb") as wf:
            if wf.getcomptype() != "NONE":
                raise UnsupportedWav(f"{path}: compressed WAV not supported")
            if wf.getnchannels() != 1:
                raise UnsupportedWav(f"{path}: expected mono, got {wf.getnchannels()} channels")
            if wf.getsampwidth() != 2:
                raise UnsupportedWav(f"{path}: expected 16-bit samples")
            n_frames = wf.getnframes()
            data = wf.readframes(n_frames)
            if len(data) < n_frames * 2:
                raise MalformedWav(
                    f"{path}: header claims {n_frames} frames but only "
                    f"{len(data) // 2} are present"
                )
            rate = wf.getframerate()
    except wave.Error as exc:
        raise MalformedWav(f"{path}: {exc}") from exc
    except EOFError as exc:
        raise MalformedWav(f"{path}: truncated header") from exc
    samples = np.frombuffer(data, dtype="<i2").astype(np.int16)
    return AudioBuffer(samples=samples, sample_rate=rate)


def write_wav(path: str | Path, buf: AudioBuffer) -> None:
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(buf.sample_rate)
        wf.writeframes(buf.samples.astype("<i2").tobytes())


def apply_gain_db(buf: AudioBuffer, gain_db: float) -> tuple[AudioBuffer, int]:
    """Scale samples by 10^(gain_db/20), round to nearest, saturate to int16.

    Returns the scaled buffer and the number of clipped samples. Ties round
    half-to-even.
    """
    if abs(gain_db) > 24:
        raise ValueError("gain_db limited to +/-24 dB")
    factor = 10.0 ** (gain_db / 20.0)
    scaled = np.rint(buf.samples.astype(np.float64) * factor)
    clipped = int(np.count_nonzero((scaled < I16_MIN) | (scaled > I16_MAX)))
    out = np.clip(scaled, I16_MIN, I16_MAX).astype(np.int16)
    return AudioBuffer(out, buf.sample_rate), clipped


def change_speed(buf: AudioBuffer, factor: float) -> AudioBuffer:
    """Varispeed resample: output length round(len/factor), samples read by
    linear interpolation at positions i*factor. Duration and pitch both move.
    """
    if not 0.5 <= factor <= 2.0:
        raise ValueError("speed factor limited to [0.5, 2.0]")
    n = len(buf.samples)
    out_len = round(n / factor)
    if n == 0 or out_len == 0:
        return AudioBuffer(np.zeros(0, dtype=np.int16), buf.sample_rate)
    positions = np.arange(out_len) * factor
    resampled = np.interp(positions, np.arange(n), buf.samples.astype(np.float64))
    return AudioBuffer(np.rint(resampled).astype(np.int16), buf.sample_rate)


def resample(buf: AudioBuffer, target_rate: int) -> AudioBuffer:
    """Sample-rate conversion by linear interpolation (no pitch change)."""
    if buf.sample_rate == target_rate:
        return buf
    n = len(buf.samples)
    out_len = round(n * target_rate / buf.sample_rate)
    if n == 0 or out_len == 0:
        return AudioBuffer(np.zeros(0, dtype=np.int16), target_rate)
    positions = np.arange(out_len) * (buf.sample_rate / target_rate)
    resampled = np.interp(positions, np.arange(n), buf.samples.astype(np.float64))
    return AudioBuffer(np.rint(resampled).astype(np.int16), target_rate)


def enforce_duration(buf: AudioBuffer, max_seconds: float = MAX_SECONDS,
                     min_seconds: float = MIN_SECONDS) -> AudioBuffer:
    """Hard-cut audio longer than ``max_seconds``; reject below ``min_seconds``."""
    if buf.duration_seconds < min_seconds:
        raise AudioTooShort(
            f"clip is {buf.duration_seconds:.3f}s, below the {min_seconds}s minimum"
        )
    limit = int(max_seconds * buf.sample_rate)
    if len(buf.samples) > limit:
        log.warning("truncating clip from %.2fs to %.2fs", buf.duration_seconds, max_seconds)
        return AudioBuffer(buf.samples[:limit].copy(), buf.sample_rate)
    return buf


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int, n_fft: int, sample_rate: int, fmin: float, fmax: float) -> np.ndarray:
    """Triangular mel filterbank, shape [n_mels, n_fft//2 + 1]."""
    n_bins = n_fft // 2 + 1
    fft_freqs = np.arange(n_bins) * sample_rate / n_fft
    mel_points = np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2)
    hz_points = mel_to_hz(mel_points)
    fb = np.zeros((n_mels, n_bins))
    for m in range(n_mels):
        left, center, right = hz_points[m], hz_points[m + 1], hz_points[m + 2]
        up = (fft_freqs - left) / (center - left)
        down = (right - fft_freqs) / (right - center)
        fb[m] = np.maximum(0.0, np.minimum(up, down))
    return fb


def mel_center_frequencies(cfg: MelConfig, sample_rate: int = CANONICAL_RATE) -> np.ndarray:
    mel_points = np.linspace(hz_to_mel(cfg.fmin), hz_to_mel(cfg.fmax), cfg.n_mels + 2)
    return mel_to_hz(mel_points)[1:-1]


def _next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p <<= 1
    return p


def mel_spectrogram(buf: AudioBuffer, cfg: MelConfig = MelConfig()) -> MelSpectrogram:
    """Log mel spectrogram: Hann-windowed power spectra through a triangular
    mel filterbank, log(power + eps).

    Frame count is 1 + floor((n - win) / hop) for n >= win, else zero frames.
    """
    if buf.sample_rate != CANONICAL_RATE:
        raise UnsupportedWav(f"mel extraction expects {CANONICAL_RATE} Hz input")
    if cfg.fmax > buf.sample_rate / 2:
        raise ValueError("fmax above Nyquist")
    n = len(buf.samples)
    hop_seconds = cfg.hop_length / buf.sample_rate
    if n < cfg.win_length:
        return MelSpectrogram(np.zeros((0, cfg.n_mels)), hop_seconds, cfg.n_mels)
    n_frames = 1 + (n - cfg.win_length) // cfg.hop_length
    n_fft = _next_pow2(cfg.win_length)
    window = np.hanning(cfg.win_length)
    fb = mel_filterbank(cfg.n_mels, n_fft, buf.sample_rate, cfg.fmin, cfg.fmax)

    x = buf.samples.astype(np.float64)
    idx = np.arange(cfg.win_length)[None, :] + cfg.hop_length * np.arange(n_frames)[:, None]
    frames = x[idx] * window[None, :]
    spectrum = np.fft.rfft(frames, n=n_fft, axis=1)
    power = np.abs(spectrum) ** 2 / n_fft
    mel_power = power @ fb.T
    return MelSpectrogram(np.log(mel_power + cfg.eps), hop_seconds, cfg.n_mels)
