"""STFT analysis/synthesis, mel magnitudes and the multi-resolution lattice.

The GAN's data domain is the real and imaginary parts of the STFT of a
canonical clip, stacked as a [2, F, T] tensor.  Analysis uses a 2048-sample
Hann window with hop 512 (75% overlap).  The clip is zero-padded (512
samples front, 1408 back) so exactly 32 frames result and every input
sample keeps nonzero window coverage; the DC bin is dropped, bins 1..1024
kept, giving the 1024x32 full-scale grid.  Inversion is weighted
overlap-add with the analysis window and per-sample window-power
normalization, with DC reinserted as zero.

Lower training resolutions form a lattice of grids.  The canonical
six-scale lattice doubles frequency at every scale and time at the last
three, from a 16x4 base:

    scale:  0       1       2       3       4        5
    grid:   32x4    64x4    128x4   256x8   512x16   1024x32

Moving down the lattice is box (mean-pool) reduction, moving up is
nearest-neighbor repetition, mirroring the generator's box up-sampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import AudioClip, CANONICAL_LENGTH, CANONICAL_RATE, require_canonical

N_FFT = 2048
HOP = 512
N_FRAMES = 32
N_BINS = 1024          # rfft bins 1..1024 after dropping DC
PAD_FRONT = 512        # keeps sample 0 under nonzero window weight
PAD_BACK = N_FFT + HOP * (N_FRAMES - 1) - PAD_FRONT - CANONICAL_LENGTH
FULL_SCALE_ID = 5

_WINDOW = 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(N_FFT) / N_FFT))


def _wola_norm() -> np.ndarray:
    total = PAD_FRONT + CANONICAL_LENGTH + PAD_BACK
    norm = np.zeros(total)
    for k in range(N_FRAMES):
        norm[k * HOP : k * HOP + N_FFT] += _WINDOW**2
    return norm


_NORM = None


@dataclass(frozen=True)
class ScaleLattice:
    """Ordered (freq, time) grids, one per scale, coarse to fine."""

    grids: tuple

    def __post_init__(self):
        if not self.grids:
            raise ValueError("lattice needs at least one scale")
        for (f0, t0), (f1, t1) in zip(self.grids, self.grids[1:]):
            if f1 % f0 or t1 % t0:
                raise ValueError(f"grid {f1}x{t1} does not refine {f0}x{t0}")

    @property
    def n_scales(self) -> int:
        return len(self.grids)

    def grid(self, scale: int):
        if not 0 <= scale < self.n_scales:
            raise ValueError(f"scale {scale} out of range 0..{self.n_scales - 1}")
        return self.grids[scale]

    def factors(self, coarse: int, fine: int):
        """(freq, time) integer ratio between a finer and a coarser scale."""
        ff, ft = self.grid(fine)
        cf, ct = self.grid(coarse)
        return ff // cf, ft // ct


FULL_LATTICE = ScaleLattice(
    ((32, 4), (64, 4), (128, 4), (256, 8), (512, 16), (1024, 32))
)


@dataclass(frozen=True)
class ComplexSpectrogram:
    """STFT tensor [2, F, T]: channel 0 real part, channel 1 imaginary."""

    data: np.ndarray
    scale_id: int

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3 or data.shape[0] != 2:
            raise ValueError(f"expected [2, F, T] tensor, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("spectrogram contains non-finite values")
        object.__setattr__(self, "data", data)

    @property
    def shape(self):
        return self.data.shape

    @property
    def grid(self):
        return self.data.shape[1], self.data.shape[2]


@dataclass(frozen=True)
class MelMagnitude:
    """Log-compressed mel magnitude spectrogram, [n_mels, T], nonnegative."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError(f"expected [n_mels, T], got shape {data.shape}")
        if np.any(data < 0):
            raise ValueError("mel magnitudes must be nonnegative")
        object.__setattr__(self, "data", data)


def _frame(padded: np.ndarray) -> np.ndarray:
    idx = np.arange(N_FFT)[None, :] + HOP * np.arange(N_FRAMES)[:, None]
    return padded[idx]


def stft(clip: AudioClip) -> ComplexSpectrogram:
    """Full-scale STFT of a canonical clip."""
    require_canonical(clip, "stft")
    padded = np.pad(clip.samples, (PAD_FRONT, PAD_BACK))
    frames = _frame(padded) * _WINDOW
    spec = np.fft.rfft(frames, axis=1)[:, 1 : N_BINS + 1]  # drop DC
    data = np.stack([spec.real.T, spec.imag.T])
    return ComplexSpectrogram(data, FULL_SCALE_ID)


def istft(spec: ComplexSpectrogram) -> AudioClip:
    """Invert a full-scale spectrogram by weighted overlap-add."""
    if spec.grid != (N_BINS, N_FRAMES):
        raise ValueError(
            f"istft requires a full-scale [2,{N_BINS},{N_FRAMES}] spectrogram, "
            f"got {spec.shape}"
        )
    global _NORM
    if _NORM is None:
        _NORM = _wola_norm()
    bins = np.zeros((N_FRAMES, N_FFT // 2 + 1), dtype=np.complex128)
    bins[:, 1:] = (spec.data[0] + 1j * spec.data[1]).T  # DC reinserted as 0
    frames = np.fft.irfft(bins, n=N_FFT, axis=1) * _WINDOW
    acc = np.zeros(PAD_FRONT + CANONICAL_LENGTH + PAD_BACK)
    for k in range(N_FRAMES):
        acc[k * HOP : k * HOP + N_FFT] += frames[k]
    out = np.where(_NORM > 1e-12, acc / np.maximum(_NORM, 1e-12), 0.0)
    return AudioClip(out[PAD_FRONT : PAD_FRONT + CANONICAL_LENGTH], CANONICAL_RATE)


def mean_pool(data: np.ndarray, f_factor: int, t_factor: int) -> np.ndarray:
    """Box-downsample the trailing (F, T) axes by integer factors."""
    *lead, f, t = data.shape
    if f % f_factor or t % t_factor:
        raise ValueError(
            f"grid {f}x{t} not divisible by pooling factors {f_factor}x{t_factor}"
        )
    shaped = data.reshape(*lead, f // f_factor, f_factor, t // t_factor, t_factor)
    return shaped.mean(axis=(-3, -1))


def repeat_upsample(data: np.ndarray, f_factor: int, t_factor: int) -> np.ndarray:
    """Nearest-neighbor (box) upsampling of the trailing (F, T) axes."""
    out = np.repeat(data, f_factor, axis=-2)
    return np.repeat(out, t_factor, axis=-1)


def downscale_spectrogram(
    spec: ComplexSpectrogram,
    target_scale: int,
    lattice: ScaleLattice = FULL_LATTICE,
) -> ComplexSpectrogram:
    """Reduce a spectrogram to a coarser lattice scale by mean pooling."""
    if not 0 <= target_scale < lattice.n_scales:
        raise ValueError(
            f"target_scale {target_scale} out of range 0..{lattice.n_scales - 1}"
        )
    if target_scale > spec.scale_id:
        raise ValueError(
            f"cannot downscale from scale {spec.scale_id} to finer {target_scale}"
        )
    if spec.grid != lattice.grid(spec.scale_id):
        raise ValueError(
            f"spectrogram grid {spec.grid} does not match lattice scale "
            f"{spec.scale_id} grid {lattice.grid(spec.scale_id)}"
        )
    if target_scale == spec.scale_id:
        return spec
    ff, ft = lattice.factors(target_scale, spec.scale_id)
    return ComplexSpectrogram(mean_pool(spec.data, ff, ft), target_scale)


def upscale_to_full(
    spec: ComplexSpectrogram, lattice: ScaleLattice = FULL_LATTICE
) -> ComplexSpectrogram:
    """Box-upsample a lattice-scale spectrogram to the full 1024x32 grid."""
    f, t = spec.grid
    if (N_BINS % f) or (N_FRAMES % t):
        raise ValueError(f"grid {spec.grid} does not divide the full grid")
    data = repeat_upsample(spec.data, N_BINS // f, N_FRAMES // t)
    return ComplexSpectrogram(data, FULL_SCALE_ID)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int) -> np.ndarray:
    """Triangular mel filters over bins 1..1024, unit peak, [n_mels, 1024].

    Unit-peak triangles on a mel-spaced grid form a partition of unity
    between peaks, so mel-projected energy never exceeds linear-bin energy.
    """
    if n_mels < 1:
        raise ValueError(f"n_mels must be >= 1, got {n_mels}")
    bin_freqs = np.arange(1, N_BINS + 1) * (CANONICAL_RATE / N_FFT)
    edges = mel_to_hz(np.linspace(0.0, hz_to_mel(8000.0), n_mels + 2))
    fb = np.zeros((n_mels, N_BINS))
    for m in range(n_mels):
        lo, mid, hi = edges[m], edges[m + 1], edges[m + 2]
        rising = (bin_freqs - lo) / (mid - lo)
        falling = (hi - bin_freqs) / (hi - mid)
        fb[m] = np.clip(np.minimum(rising, falling), 0.0, 1.0)
    return fb


def mel_magnitude(spec: ComplexSpectrogram, n_mels: int = 128) -> MelMagnitude:
    """Mel-projected STFT magnitude with log(1+x) compression."""
    if spec.grid != (N_BINS, N_FRAMES):
        raise ValueError(f"mel_magnitude requires a full-scale spectrogram, got {spec.shape}")
    fb = mel_filterbank(n_mels)
    mag = np.sqrt(spec.data[0] ** 2 + spec.data[1] ** 2)
    return MelMagnitude(np.log1p(fb @ mag))
