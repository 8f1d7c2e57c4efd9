"""Waveform container, WAV file I/O, resampling and clip canonicalization.

The whole system works on one-second mono clips at 16 kHz ("canonical"
clips).  Everything here is a pure function; clips are never mutated in
place.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

CANONICAL_RATE = 16000
CANONICAL_LENGTH = 16000
PEAK_TARGET = 0.98
SILENCE_RMS = 1e-5


class SilentInputError(ValueError):
    """Raised when an operation needs signal energy but the clip is silent."""


@dataclass(frozen=True)
class AudioClip:
    """Mono waveform with its sample rate.

    Samples are float64 amplitudes nominally in [-1, 1].
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"expected mono 1-D samples, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("clip contains non-finite samples")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    @property
    def is_canonical(self) -> bool:
        return (
            self.sample_rate == CANONICAL_RATE
            and len(self.samples) == CANONICAL_LENGTH
        )

    def rms(self) -> float:
        if len(self.samples) == 0:
            return 0.0
        return float(np.sqrt(np.mean(self.samples**2)))

    def peak(self) -> float:
        if len(self.samples) == 0:
            return 0.0
        return float(np.max(np.abs(self.samples)))


def require_canonical(clip: AudioClip, op: str) -> None:
    if not clip.is_canonical:
        raise ValueError(
            f"{op} requires a canonical clip (16000 samples @ 16000 Hz), "
            f"got {len(clip)} samples @ {clip.sample_rate} Hz"
        )


def read_wav(source) -> AudioClip:
    """Read a RIFF WAV file (path, file object or bytes) into an AudioClip.

    Accepts PCM 8/16/24/32-bit and IEEE float32/64, mono or stereo; stereo
    is downmixed by channel mean.
    """
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    try:
        rate, data = wavfile.read(source)
    except Exception as exc:
        raise ValueError(f"not a decodable WAV file: {exc}") from exc
    if data.ndim not in (1, 2):
        raise ValueError(f"unsupported channel layout with shape {data.shape}")
    if data.dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        # 24-bit PCM arrives LSB-zero-padded into int32, same divisor applies
        samples = data.astype(np.float64) / 2147483648.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise ValueError(f"unsupported WAV sample format {data.dtype}")
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    return AudioClip(samples, int(rate))


def write_wav(path_or_file, clip: AudioClip) -> None:
    """Write a clip as 16-bit mono PCM, little-endian."""
    samples = np.clip(clip.samples, -1.0, 1.0)
    pcm = np.round(samples * 32767.0).astype(np.int16)
    wavfile.write(path_or_file, clip.sample_rate, pcm)


def wav_bytes(clip: AudioClip) -> bytes:
    buf = io.BytesIO()
    write_wav(buf, clip)
    return buf.getvalue()


def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    """Band-limited (windowed-sinc polyphase) sample rate conversion.

    Output length is round(len * target / source).
    """
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if clip.sample_rate < 8000:
        raise ValueError(
            f"resample requires source rate >= 8000 Hz, got {clip.sample_rate}"
        )
    if target_rate == clip.sample_rate:
        return clip
    ratio = Fraction(target_rate, clip.sample_rate)
    out = resample_poly(clip.samples, ratio.numerator, ratio.denominator)
    n_out = int(round(len(clip) * target_rate / clip.sample_rate))
    if len(out) < n_out:
        out = np.pad(out, (0, n_out - len(out)))
    return AudioClip(out[:n_out], target_rate)


def standardize(clip: AudioClip) -> AudioClip:
    """Canonicalize: resample to 16 kHz, fix length to 1 s, tame the peak.

    Long clips keep their first second, short ones are zero-padded at the
    tail.  The peak is rescaled to 0.98 only when it exceeds 1.
    """
    if len(clip) == 0:
        raise ValueError("cannot standardize an empty clip")
    out = resample(clip, CANONICAL_RATE)
    samples = out.samples
    if len(samples) > CANONICAL_LENGTH:
        samples = samples[:CANONICAL_LENGTH]
    elif len(samples) < CANONICAL_LENGTH:
        samples = np.pad(samples, (0, CANONICAL_LENGTH - len(samples)))
    peak = np.max(np.abs(samples)) if len(samples) else 0.0
    if peak > 1.0:
        samples = samples * (PEAK_TARGET / peak)
    return AudioClip(samples, CANONICAL_RATE)


def peak_normalize(clip: AudioClip, target: float = PEAK_TARGET) -> AudioClip:
    peak = clip.peak()
    if peak <= 0:
        return clip
    return AudioClip(clip.samples * (target / peak), clip.sample_rate)


def quantize16(clip: AudioClip) -> AudioClip:
    """Round-trip through 16-bit PCM so in-memory values match a saved file."""
    samples = np.clip(clip.samples, -1.0, 1.0)
    pcm = np.round(samples * 32767.0).astype(np.int16)
    return AudioClip(pcm.astype(np.float64) / 32768.0, clip.sample_rate)
