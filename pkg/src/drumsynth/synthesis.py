"""Turn generator outputs into full-scale spectrograms and audio clips."""

from __future__ import annotations

import numpy as np
import torch

from .audio import AudioClip, quantize16
from .nets import Generator, NetConfig
from .spectral import (
    FULL_SCALE_ID,
    N_BINS,
    N_FRAMES,
    ComplexSpectrogram,
    istft,
    repeat_upsample,
)


def render_spectrograms(
    gen: Generator,
    net: NetConfig,
    z: np.ndarray,
    cond=None,
    scale=None,
    alpha: float = 1.0,
) -> np.ndarray:
    """Run the generator and undo training-domain normalization.

    Returns [n, 2, f, t] in raw STFT units at the requested scale's grid
    (default: the net's finest scale).
    """
    if scale is None:
        scale = net.n_scales - 1
    z_t = torch.from_numpy(np.ascontiguousarray(z)).float()
    c_t = None
    if net.cond_dim:
        if cond is None:
            raise ValueError("conditional generator requires a conditioning array")
        c_t = torch.from_numpy(np.ascontiguousarray(cond)).float()
    with torch.no_grad():
        out = gen(z_t, c_t, scale, alpha)
    return out.numpy().astype(np.float64) * net.out_scale


def spectrogram_to_clip(spec_data: np.ndarray) -> AudioClip:
    """Upsample a [2, f, t] array to the full grid and invert to audio."""
    if spec_data.ndim != 3 or spec_data.shape[0] != 2:
        raise ValueError(f"expected [2, f, t] spectrogram data, got {spec_data.shape}")
    f, t = spec_data.shape[1], spec_data.shape[2]
    if N_BINS % f or N_FRAMES % t:
        raise ValueError(f"grid ({f}, {t}) does not divide the full grid ({N_BINS}, {N_FRAMES})")
    full = repeat_upsample(spec_data, N_BINS // f, N_FRAMES // t)
    clip = istft(ComplexSpectrogram(full, FULL_SCALE_ID))
    bounded = AudioClip(np.clip(clip.samples, -1.0, 1.0), clip.sample_rate)
    return quantize16(bounded)


def render_clips(
    gen: Generator,
    net: NetConfig,
    z: np.ndarray,
    cond=None,
    scale=None,
    alpha: float = 1.0,
) -> list:
    specs = render_spectrograms(gen, net, z, cond, scale, alpha)
    return [spectrogram_to_clip(spec) for spec in specs]


def sample_clips(gen: Generator, net: NetConfig, cond: np.ndarray, seed: int) -> list:
    """Seeded convenience wrapper: one clip per conditioning row."""
    cond = np.atleast_2d(np.asarray(cond, dtype=np.float64))
    n = cond.shape[0]
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, net.latent_dim))
    return render_clips(gen, net, z, cond if net.cond_dim else None)
