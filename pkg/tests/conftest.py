"""Shared signal constructors and session fixtures for the test suite."""

import io
import struct

import numpy as np
import pytest

from drumsynth.audio import AudioClip, CANONICAL_LENGTH, CANONICAL_RATE


def sine_clip(freq_hz, rate=CANONICAL_RATE, length=CANONICAL_LENGTH, amp=1.0):
    n = np.arange(length)
    return AudioClip(amp * np.sin(2 * np.pi * freq_hz * n / rate), rate)


def noise_clip(seed, rate=CANONICAL_RATE, length=CANONICAL_LENGTH, amp=0.9):
    rng = np.random.default_rng(seed)
    return AudioClip(amp * rng.uniform(-1.0, 1.0, length), rate)


def multitone_clip(seed, n_tones=48, fade=4096, min_bin=8):
    """Random canonical clip with no energy at the STFT frame DC.

    Tones sit on the 2048-point frame-DFT bin grid (bins >= min_bin), where
    the Hann window leaks only into the two adjacent bins, so every analysis
    frame has (near-)zero DC.  The long raised-cosine fade keeps the
    zero-padding boundaries from reintroducing leakage.
    """
    rng = np.random.default_rng(seed)
    bins = rng.choice(np.arange(min_bin, 1021), size=n_tones, replace=False)
    amps = rng.uniform(0.1, 1.0, n_tones)
    phases = rng.uniform(0, 2 * np.pi, n_tones)
    n = np.arange(CANONICAL_LENGTH)
    x = (
        amps[:, None]
        * np.cos(2 * np.pi / 2048 * bins[:, None] * n[None, :] + phases[:, None])
    ).sum(axis=0)
    env = np.ones(CANONICAL_LENGTH)
    ramp = 0.5 * (1 - np.cos(np.pi * np.arange(fade) / fade))
    env[:fade] = ramp
    env[-fade:] = ramp[::-1]
    x = x * env
    return AudioClip(0.9 * x / np.max(np.abs(x)), CANONICAL_RATE)


def pcm_wav_bytes(samples, rate, sampwidth, n_channels=1, fmt_tag=1):
    """Hand-rolled RIFF encoder so reader tests do not depend on the writer."""
    if fmt_tag == 3:  # IEEE float32
        raw = np.asarray(samples, dtype=np.float32).tobytes()
        bits = 32
    elif sampwidth == 1:
        raw = np.asarray(samples, dtype=np.uint8).tobytes()
        bits = 8
    elif sampwidth == 2:
        raw = np.asarray(samples, dtype="<i2").tobytes()
        bits = 16
    elif sampwidth == 3:
        raw = b"".join(struct.pack("<i", int(v))[:3] for v in samples)
        bits = 24
    else:
        raise ValueError(sampwidth)
    buf = io.BytesIO()
    byte_rate = rate * n_channels * bits // 8
    block = n_channels * bits // 8
    buf.write(b"RIFF")
    buf.write(struct.pack("<I", 36 + len(raw)))
    buf.write(b"WAVE")
    buf.write(b"fmt ")
    buf.write(struct.pack("<IHHIIHH", 16, fmt_tag, n_channels, rate, byte_rate, block, bits))
    buf.write(b"data")
    buf.write(struct.pack("<I", len(raw)))
    buf.write(raw)
    return buf.getvalue()


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """Small synthetic drum corpus shared across data/eval tests."""
    from drumsynth.data import synth_dataset

    root = tmp_path_factory.mktemp("tiny_corpus")
    index = synth_dataset(20, seed=11, out_dir=root)
    return index
