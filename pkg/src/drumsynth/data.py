"""Dataset ingestion, splitting, batching and the synthetic drum corpus.

Real or synthetic WAVs are standardized to the canonical format, their
feature vectors cached, and the result written as a JSON-lines index plus
a canonical 16-bit WAV cache.  Features are extracted from the 16-bit
quantized signal so that re-extracting from a cached file reproduces the
cached vector exactly.

The synthetic corpus provides three separable percussion classes (kick,
snare, cymbal) with per-item parameter jitter, standing in for a real
drum library so the whole pipeline runs end to end from a clean checkout.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal as sps

from .audio import (
    AudioClip,
    CANONICAL_LENGTH,
    CANONICAL_RATE,
    SilentInputError,
    quantize16,
    read_wav,
    standardize,
    write_wav,
)
from .features import FeatureVector, extract_all
from .spectral import FULL_LATTICE, N_BINS, N_FRAMES, ScaleLattice, mean_pool, stft

log = logging.getLogger(__name__)

CLASSES = ("kick", "snare", "cymbal")
VAL_FRACTION = 0.1
INDEX_VERSION = 1

_PARAM_RANGES = {
    "kick": {
        "pitch_lo": (40.0, 65.0),
        "pitch_hi": (120.0, 180.0),
        "sweep_tau": (0.03, 0.08),
        "decay_tau": (0.08, 0.20),
        "click_amp": (0.1, 0.4),
        "gain": (0.55, 0.95),
    },
    "snare": {
        "tone_hz": (165.0, 195.0),
        "tone_tau": (0.04, 0.10),
        "noise_tau": (0.10, 0.20),
        "noise_lo": (800.0, 1400.0),
        "noise_hi": (3200.0, 4800.0),
        "noise_mix": (0.5, 0.8),
        "gain": (0.55, 0.95),
    },
    "cymbal": {
        "decay_tau": (0.20, 0.34),
        "cutoff_hz": (2800.0, 3600.0),
        "comb_delay": (11.0, 23.0),
        "comb_gain": (0.45, 0.70),
        "shimmer_hz": (5000.0, 7000.0),
        "gain": (0.55, 0.95),
    },
}


@dataclass(frozen=True)
class SynthSpec:
    """Parameters for one synthetic drum hit; all values range-checked."""

    drum_class: str
    params: dict
    seed: int

    def __post_init__(self):
        if self.drum_class not in CLASSES:
            raise ValueError(f"unknown class {self.drum_class!r}, expected one of {CLASSES}")
        ranges = _PARAM_RANGES[self.drum_class]
        if set(self.params) != set(ranges):
            raise ValueError(
                f"{self.drum_class} params must be exactly {sorted(ranges)}, "
                f"got {sorted(self.params)}"
            )
        for name, value in self.params.items():
            lo, hi = ranges[name]
            if not lo <= value <= hi:
                raise ValueError(f"{self.drum_class}.{name}={value} outside [{lo}, {hi}]")


def random_spec(drum_class: str, rng: np.random.Generator) -> SynthSpec:
    ranges = _PARAM_RANGES[drum_class]
    params = {name: float(rng.uniform(lo, hi)) for name, (lo, hi) in sorted(ranges.items())}
    return SynthSpec(drum_class, params, int(rng.integers(0, 2**31)))


def _pad_canonical(x: np.ndarray) -> np.ndarray:
    if len(x) >= CANONICAL_LENGTH:
        return x[:CANONICAL_LENGTH]
    return np.pad(x, (0, CANONICAL_LENGTH - len(x)))


def synth_clip(spec: SynthSpec) -> AudioClip:
    """Render one drum hit deterministically from its spec."""
    rng = np.random.default_rng(spec.seed)
    p = spec.params
    if spec.drum_class == "kick":
        t = np.arange(int(0.5 * CANONICAL_RATE)) / CANONICAL_RATE
        freq = p["pitch_lo"] + (p["pitch_hi"] - p["pitch_lo"]) * np.exp(-t / p["sweep_tau"])
        phase = 2 * np.pi * np.cumsum(freq) / CANONICAL_RATE
        x = np.sin(phase) * np.exp(-t / p["decay_tau"])
        click = rng.normal(0, 1, 64) * np.exp(-np.arange(64) / 16.0)
        x[:64] += p["click_amp"] * click
    elif spec.drum_class == "snare":
        n = int(0.45 * CANONICAL_RATE)
        t = np.arange(n) / CANONICAL_RATE
        tone = np.sin(2 * np.pi * p["tone_hz"] * t) * np.exp(-t / p["tone_tau"])
        sos = sps.butter(
            2, [p["noise_lo"], p["noise_hi"]], btype="bandpass", fs=CANONICAL_RATE, output="sos"
        )
        noise = sps.sosfilt(sos, rng.normal(0, 1, n)) * np.exp(-t / p["noise_tau"])
        noise = noise / max(np.max(np.abs(noise)), 1e-12)
        x = (1 - p["noise_mix"]) * tone + p["noise_mix"] * noise
    else:
        n = int(1.0 * CANONICAL_RATE)
        t = np.arange(n) / CANONICAL_RATE
        x = rng.normal(0, 1, n)
        d = int(round(p["comb_delay"]))
        b = np.zeros(d + 1)
        b[0], b[d] = 1.0, p["comb_gain"]
        x = sps.lfilter(b, [1.0], x)
        sos = sps.butter(4, p["cutoff_hz"], btype="highpass", fs=CANONICAL_RATE, output="sos")
        x = sps.sosfilt(sos, x)
        shimmer = np.sin(2 * np.pi * p["shimmer_hz"] * t)
        x = (x + 0.1 * shimmer * np.abs(x)) * np.exp(-t / p["decay_tau"])
    x = _pad_canonical(x)
    x = p["gain"] * x / max(np.max(np.abs(x)), 1e-12)
    return AudioClip(x, CANONICAL_RATE)


@dataclass(frozen=True)
class DatasetEntry:
    path: str              # relative to the index root, points at the cached WAV
    drum_class: str        # one of CLASSES, or None for unlabeled ingestion
    features: FeatureVector
    split: str             # "train" or "val"

    def to_json(self) -> str:
        return json.dumps(
            {
                "path": self.path,
                "class": self.drum_class,
                "split": self.split,
                "features": [float(v) for v in self.features.values],
            },
            sort_keys=True,
        )

    @staticmethod
    def from_json(line: str) -> "DatasetEntry":
        obj = json.loads(line)
        return DatasetEntry(
            obj["path"], obj["class"], FeatureVector(np.array(obj["features"])), obj["split"]
        )


@dataclass(frozen=True)
class DatasetIndex:
    entries: tuple
    manifest_hash: str
    root: Path

    def __post_init__(self):
        if not self.entries:
            raise ValueError("dataset index has no entries")

    def split_entries(self, split: str) -> tuple:
        return tuple(e for e in self.entries if e.split == split)

    def clip(self, entry: DatasetEntry) -> AudioClip:
        return read_wav(str(self.root / entry.path))

    @staticmethod
    def from_entries(entries, root) -> "DatasetIndex":
        entries = tuple(sorted(entries, key=lambda e: e.path))
        payload = "".join(e.to_json() + "\n" for e in entries).encode()
        return DatasetIndex(entries, hashlib.sha256(payload).hexdigest(), Path(root))

    def save(self) -> None:
        lines = "".join(e.to_json() + "\n" for e in self.entries)
        (self.root / "index.jsonl").write_text(lines)
        manifest = {
            "version": INDEX_VERSION,
            "entries": len(self.entries),
            "sha256": self.manifest_hash,
        }
        (self.root / "manifest.json").write_text(json.dumps(manifest, indent=1))

    @staticmethod
    def load(root) -> "DatasetIndex":
        root = Path(root)
        manifest = json.loads((root / "manifest.json").read_text())
        if manifest.get("version") != INDEX_VERSION:
            raise ValueError(
                f"unsupported index version {manifest.get('version')}, expected {INDEX_VERSION}"
            )
        payload = (root / "index.jsonl").read_bytes()
        digest = hashlib.sha256(payload).hexdigest()
        if digest != manifest["sha256"]:
            raise ValueError("index hash mismatch, file corrupted or edited")
        entries = tuple(DatasetEntry.from_json(line) for line in payload.decode().splitlines())
        return DatasetIndex(entries, digest, root)


def _assign_splits(rel_paths, seed: int) -> dict:
    """Stable 90/10 split keyed by path hash, independent of scan order."""
    keyed = {
        p: hashlib.sha256(f"{seed}:{p}".encode()).hexdigest() for p in rel_paths
    }
    n_val = round(len(rel_paths) * VAL_FRACTION)
    val = set(sorted(keyed, key=keyed.get, reverse=True)[:n_val])
    return {p: ("val" if p in val else "train") for p in rel_paths}


def ingest(in_dir, out_dir, seed: int = 0) -> DatasetIndex:
    """Standardize a directory of WAVs into an indexed, feature-cached corpus.

    Class labels come from the first path component when it names a known
    class; anything else ingests unlabeled.  Unreadable or silent files are
    skipped with a warning.
    """
    in_dir, out_dir = Path(in_dir), Path(out_dir)
    paths = sorted(p for p in in_dir.rglob("*") if p.suffix.lower() == ".wav")
    prepared = []
    for path in paths:
        rel = path.relative_to(in_dir).as_posix()
        try:
            clip = standardize(read_wav(str(path)))
            features = extract_all(quantize16(clip))
        except SilentInputError:
            log.warning("skipping silent clip %s", rel)
            continue
        except ValueError as exc:
            log.warning("skipping unreadable clip %s: %s", rel, exc)
            continue
        head = rel.split("/", 1)[0]
        drum_class = head if head in CLASSES else None
        prepared.append((rel, drum_class, features, clip))
    if not prepared:
        raise ValueError(f"no usable WAV files under {in_dir}")
    splits = _assign_splits([rel for rel, *_ in prepared], seed)
    entries = []
    for rel, drum_class, features, clip in prepared:
        cache_rel = f"cache/{rel}"
        target = out_dir / cache_rel
        target.parent.mkdir(parents=True, exist_ok=True)
        write_wav(str(target), clip)
        entries.append(DatasetEntry(cache_rel, drum_class, features, splits[rel]))
    index = DatasetIndex.from_entries(entries, out_dir)
    index.save()
    return index


def synth_dataset(n_per_class: int, seed: int, out_dir) -> DatasetIndex:
    """Generate a labeled synthetic corpus and ingest it like real data."""
    if n_per_class < 1:
        raise ValueError(f"n_per_class must be >= 1, got {n_per_class}")
    out_dir = Path(out_dir)
    rng = np.random.default_rng(seed)
    width = max(4, len(str(n_per_class - 1)))
    for drum_class in CLASSES:
        class_dir = out_dir / "raw" / drum_class
        class_dir.mkdir(parents=True, exist_ok=True)
        for i in range(n_per_class):
            clip = synth_clip(random_spec(drum_class, rng))
            write_wav(str(class_dir / f"{drum_class}_{i:0{width}d}.wav"), clip)
    return ingest(out_dir / "raw", out_dir, seed=seed)


def batches(
    index: DatasetIndex,
    scale: int,
    batch_size: int,
    rng: np.random.Generator,
    lattice: ScaleLattice = FULL_LATTICE,
    split: str = "train",
):
    """Endless stream of (spectrograms [N,2,F,T], features [N,7]) batches.

    Each epoch is one shuffled pass visiting every entry of the split
    exactly once; the final batch of an epoch may be short.  Full-scale
    spectrograms are pooled down to the requested lattice grid and cached
    in memory for the stream's lifetime.
    """
    entries = index.split_entries(split)
    if not entries:
        raise ValueError(f"split {split!r} has no entries")
    if batch_size < 1 or batch_size > len(entries):
        raise ValueError(
            f"batch_size {batch_size} outside 1..{len(entries)} ({split} split size)"
        )
    f, t = lattice.grid(scale)
    if N_BINS % f or N_FRAMES % t:
        raise ValueError(f"grid {(f, t)} does not divide the full STFT grid")
    specs = np.stack(
        [mean_pool(stft(index.clip(e)).data, N_BINS // f, N_FRAMES // t) for e in entries]
    )
    feats = np.stack([e.features.values for e in entries])
    while True:
        order = rng.permutation(len(entries))
        for start in range(0, len(entries), batch_size):
            chosen = order[start : start + batch_size]
            yield specs[chosen], feats[chosen]
