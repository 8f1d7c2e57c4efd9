"""Seven timbre descriptors used for conditioning and coherence probes.

Each descriptor is a deterministic scalar in [0, 100] computed from
short-time spectra of a canonical clip; `extract_all` packs the seven
values, divided by 100, into a FeatureVector in the frozen order

    brightness, hardness, depth, roughness, boominess, warmth, sharpness

Absolute agreement with any reference implementation is a non-goal; the
contract is monotone correctness (brighter inputs score higher on
brightness, and so on) plus amplitude invariance for the energy-ratio
descriptors.  Scale/offset constants below were calibrated once on the
synthetic drum corpus so typical drum material spreads over the range,
then frozen.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import AudioClip, SILENCE_RMS, SilentInputError, require_canonical

FEATURE_NAMES = (
    "brightness",
    "hardness",
    "depth",
    "roughness",
    "boominess",
    "warmth",
    "sharpness",
)
N_FEATURES = len(FEATURE_NAMES)

# analysis framing for feature extraction (finer in time than the GAN STFT)
_AN_NFFT = 1024
_AN_HOP = 256
_AN_WINDOW = 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(_AN_NFFT) / _AN_NFFT))
_AN_FREQS = np.arange(_AN_NFFT // 2 + 1) * (16000.0 / _AN_NFFT)

_PEAK_REL_THRESHOLD = 0.05   # peaks below 5% of the frame max are ignored
_ATTACK_SECONDS = 0.05
_ONSET_REL_RMS = 0.1

# Plomp-Levelt style dissonance kernel, unit peak at 70 Hz separation
_PL_B1, _PL_B2 = 3.5, 5.75
_PL_VSTAR = np.log(_PL_B2 / _PL_B1) / (_PL_B2 - _PL_B1)
_PL_PEAK = np.exp(-_PL_B1 * _PL_VSTAR) - np.exp(-_PL_B2 * _PL_VSTAR)

# affine calibration (scale, offset) applied to each raw score before the
# final clamp to [0, 1]; frozen from scripts/calibrate_features.py output
# (150 clips per class, seed 2024, p5..p95 of raw mapped to 0.05..0.95)
_CAL = {
    "hardness": (0.4959, -0.0062),
    "roughness": (0.0045, 0.0500),
    "boominess": (0.0882, 0.0500),
    "sharpness": (0.3698, -0.0069),
}


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """The 7 conditioning features, normalized to [0, 1], frozen order."""

    values: np.ndarray

    def __eq__(self, other):
        return isinstance(other, FeatureVector) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (N_FEATURES,):
            raise ValueError(f"expected {N_FEATURES} features, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature values must be finite")
        if np.any(values < 0) or np.any(values > 1):
            raise ValueError(f"feature values must lie in [0, 1], got {values}")
        object.__setattr__(self, "values", values)

    def as_dict(self) -> dict:
        return {name: float(v) for name, v in zip(FEATURE_NAMES, self.values)}


@dataclass(frozen=True)
class FrameFeatures:
    """Per-frame spectral plumbing shared by the descriptor formulas.

    centroid: [n_frames] Hz in [0, 8000]; band_energy: [n_frames, 3] with
    columns (low <200 Hz, mid 200-2000 Hz, high >2000 Hz); peaks: one
    (bins, magnitudes) pair per frame.
    """

    centroid: np.ndarray
    band_energy: np.ndarray
    peaks: tuple

    def __post_init__(self):
        if np.any(self.band_energy < 0):
            raise ValueError("band energies must be nonnegative")
        if np.any(self.centroid < 0) or np.any(self.centroid > 8000):
            raise ValueError("frame centroids must lie in [0, 8000] Hz")


class _Analysis:
    """One-pass framing shared by all descriptors of a clip."""

    def __init__(self, clip: AudioClip):
        x = clip.samples
        n_frames = 1 + (len(x) - _AN_NFFT) // _AN_HOP
        idx = np.arange(_AN_NFFT)[None, :] + _AN_HOP * np.arange(n_frames)[:, None]
        frames = x[idx]
        self.samples = x
        self.frame_rms = np.sqrt(np.mean(frames**2, axis=1))
        self.mags = np.abs(np.fft.rfft(frames * _AN_WINDOW, axis=1))
        self.power = self.mags**2
        self.mean_power = self.power.mean(axis=0)

    def band_power(self, lo_hz: float, hi_hz: float, lo_open=False, hi_open=False):
        lo_ok = _AN_FREQS > lo_hz if lo_open else _AN_FREQS >= lo_hz
        hi_ok = _AN_FREQS < hi_hz if hi_open else _AN_FREQS <= hi_hz
        return float(self.mean_power[lo_ok & hi_ok].sum())

    def centroid_hz(self) -> float:
        total = self.mean_power.sum()
        if total <= 0:
            return 0.0
        return float((_AN_FREQS * self.mean_power).sum() / total)


def frame_features(clip: AudioClip) -> FrameFeatures:
    require_canonical(clip, "frame_features")
    an = _Analysis(clip)
    totals = an.power.sum(axis=1)
    centroid = np.where(totals > 0, (an.power * _AN_FREQS).sum(axis=1) / np.maximum(totals, 1e-300), 0.0)
    low = an.power[:, _AN_FREQS < 200].sum(axis=1)
    mid = an.power[:, (_AN_FREQS >= 200) & (_AN_FREQS <= 2000)].sum(axis=1)
    high = an.power[:, _AN_FREQS > 2000].sum(axis=1)
    peaks = tuple(_frame_peaks(m) for m in an.mags)
    return FrameFeatures(centroid, np.stack([low, mid, high], axis=1), peaks)


def _frame_peaks(mags: np.ndarray):
    interior = mags[1:-1]
    is_peak = (interior > mags[:-2]) & (interior >= mags[2:])
    thresh = _PEAK_REL_THRESHOLD * mags.max()
    bins = np.where(is_peak & (interior >= thresh))[0] + 1
    return bins, mags[bins]


def _calibrated(kind: str, raw: float) -> float:
    scale, offset = _CAL[kind]
    return 100.0 * float(np.clip(scale * raw + offset, 0.0, 1.0))


def _brightness(an: _Analysis) -> float:
    total = an.mean_power.sum()
    hf_ratio = an.band_power(2000.0, 8000.0, lo_open=True) / total
    centroid_norm = an.centroid_hz() / 8000.0
    return 100.0 * float(np.clip((2.0 * centroid_norm + 2.0 * hf_ratio) / 4.0, 0.0, 1.0))


def _depth(an: _Analysis) -> float:
    total = an.mean_power.sum()
    lf_ratio = an.band_power(0.0, 200.0, hi_open=True) / total
    low_mask = _AN_FREQS < 800.0
    low_power = an.mean_power[low_mask]
    if low_power.sum() > 0:
        centroid_low = (_AN_FREQS[low_mask] * low_power).sum() / low_power.sum()
        centroid_low_norm = centroid_low / 800.0
    else:
        centroid_low_norm = 1.0
    significant = np.where(an.mean_power >= 0.05 * an.mean_power.max())[0]
    lf_limit_norm = 1.0 - _AN_FREQS[significant[0]] / 8000.0
    u = 0.5 * lf_ratio + 0.3 * (1.0 - centroid_low_norm) + 0.2 * lf_limit_norm
    return 100.0 * float(np.clip(u, 0.0, 1.0))


def _pl_kernel(delta_hz: np.ndarray) -> np.ndarray:
    v = _PL_VSTAR * delta_hz / 70.0
    return (np.exp(-_PL_B1 * v) - np.exp(-_PL_B2 * v)) / _PL_PEAK


def _roughness_raw(an: _Analysis) -> float:
    per_frame = []
    for mags in an.mags:
        bins, amp = _frame_peaks(mags)
        if len(bins) < 2:
            per_frame.append(0.0)
            continue
        freq = bins * (16000.0 / _AN_NFFT)
        df = np.abs(freq[:, None] - freq[None, :])
        iu, ju = np.triu_indices(len(bins), k=1)
        sep = df[iu, ju]
        keep = (sep >= 30.0) & (sep <= 300.0)
        if not np.any(keep):
            per_frame.append(0.0)
            continue
        a, b = amp[iu[keep]], amp[ju[keep]]
        ratio = np.minimum(a, b) / np.maximum(a, b)
        per_frame.append(float((ratio * _pl_kernel(sep[keep])).sum()))
    return float(np.mean(per_frame))


def _hardness_raw(an: _Analysis) -> float:
    rms = an.frame_rms
    onset = int(np.argmax(rms > _ONSET_REL_RMS * rms.max()))
    start = onset * _AN_HOP
    seg = an.samples[start : start + int(_ATTACK_SECONDS * 16000)]
    seg = np.pad(seg, (0, int(_ATTACK_SECONDS * 16000) - len(seg)))
    win = 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(len(seg)) / len(seg)))
    power = np.abs(np.fft.rfft(seg * win)) ** 2
    freqs = np.arange(len(power)) * (16000.0 / len(seg))
    total = power.sum()
    if total > 0:
        centroid_norm = (freqs * power).sum() / total / 8000.0
        hf_ratio = power[freqs > 2000.0].sum() / total
    else:
        centroid_norm = hf_ratio = 0.0
    # envelope rise over 5 ms sub-frames, normalized by the segment peak
    sub = 80
    n_sub = 1 + (len(seg) - sub) // (sub // 2)
    sidx = np.arange(sub)[None, :] + (sub // 2) * np.arange(n_sub)[:, None]
    env = np.sqrt(np.mean(seg[sidx] ** 2, axis=1))
    slope = max(0.0, float(np.diff(env).max())) / env.max() if env.max() > 0 else 0.0
    return slope + centroid_norm + hf_ratio


def _boominess_raw(an: _Analysis) -> float:
    low = an.band_power(0.0, 150.0, hi_open=True)
    mid = an.band_power(150.0, 800.0)
    total = an.mean_power.sum()
    return float(np.log1p(2.0 * low / max(mid, 1e-12 * total)))


def _warmth(an: _Analysis) -> float:
    total = an.mean_power.sum()
    band = an.band_power(100.0, 400.0) / total
    u = 0.6 * band + 0.4 * (1.0 - an.centroid_hz() / 8000.0)
    return 100.0 * float(np.clip(u, 0.0, 1.0))


def _sharpness_raw(an: _Analysis) -> float:
    loud = an.mean_power**0.3
    gain = np.where(_AN_FREQS < 3000.0, 1.0, (_AN_FREQS / 3000.0) ** 2)
    return float((gain * (_AN_FREQS / 8000.0) * loud).sum() / loud.sum())


def _extract(an: _Analysis, kind: str) -> float:
    if kind == "brightness":
        return _brightness(an)
    if kind == "hardness":
        return _calibrated(kind, _hardness_raw(an))
    if kind == "depth":
        return _depth(an)
    if kind == "roughness":
        return _calibrated(kind, _roughness_raw(an))
    if kind == "boominess":
        return _calibrated(kind, _boominess_raw(an))
    if kind == "warmth":
        return _warmth(an)
    if kind == "sharpness":
        return _calibrated(kind, _sharpness_raw(an))
    raise ValueError(f"unknown feature {kind!r}, expected one of {FEATURE_NAMES}")


def _analyze(clip: AudioClip, op: str) -> _Analysis:
    require_canonical(clip, op)
    if clip.rms() <= SILENCE_RMS:
        raise SilentInputError(
            f"{op} requires a non-silent clip (RMS {clip.rms():.2e} <= {SILENCE_RMS})"
        )
    return _Analysis(clip)


def extract_feature(clip: AudioClip, kind: str) -> float:
    """One descriptor of a non-silent canonical clip, raw [0, 100] units."""
    if kind not in FEATURE_NAMES:
        raise ValueError(f"unknown feature {kind!r}, expected one of {FEATURE_NAMES}")
    return _extract(_analyze(clip, "extract_feature"), kind)


def extract_raw(clip: AudioClip) -> dict:
    """All seven descriptors in raw [0, 100] units, one analysis pass."""
    an = _analyze(clip, "extract_raw")
    return {kind: _extract(an, kind) for kind in FEATURE_NAMES}


def extract_all(clip: AudioClip) -> FeatureVector:
    """All seven descriptors, normalized into a [0, 1] FeatureVector."""
    raw = extract_raw(clip)
    return FeatureVector(np.array([raw[k] for k in FEATURE_NAMES]) / 100.0)
