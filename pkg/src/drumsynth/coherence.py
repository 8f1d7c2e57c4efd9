"""Feature-coherence protocol.

For one conditioning feature, each trial fixes a latent draw and a base
feature vector (from the validation split), renders with the feature set
to 0.2 / 0.5 / 0.8, re-measures the feature on the rendered audio and
scores three orderings: E1 low<high, E2 mid<high, E3 low<mid.  Silent
renders fail the whole trial (logged) instead of aborting the run.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .data import DatasetIndex
from .features import FEATURE_NAMES, N_FEATURES, SilentInputError, extract_feature
from .nets import Generator, NetConfig
from .synthesis import render_clips

log = logging.getLogger(__name__)

LEVELS = (0.2, 0.5, 0.8)


@dataclass(frozen=True)
class CoherenceResult:
    e1: float
    e2: float
    e3: float
    n_trials: int
    n_failed: int

    def __post_init__(self):
        for acc in (self.e1, self.e2, self.e3):
            if not 0.0 <= acc <= 1.0:
                raise ValueError(f"accuracy outside [0, 1]: {acc}")
        if not 0 <= self.n_failed <= self.n_trials:
            raise ValueError(f"bad trial counts {self.n_failed}/{self.n_trials}")

    def as_dict(self) -> dict:
        return {
            "e1": self.e1,
            "e2": self.e2,
            "e3": self.e3,
            "n_trials": self.n_trials,
            "n_failed": self.n_failed,
        }


def coherence_test(
    render,
    measure,
    base_features: np.ndarray,
    feature_index: int,
    n_trials: int = 1000,
    seed: int = 0,
    latent_dim: int = 128,
) -> CoherenceResult:
    """Score the three orderings over n_trials; generic in render/measure.

    render(z, feats) produces an object that measure maps to a scalar;
    measure may raise SilentInputError to fail the trial.
    """
    base_features = np.asarray(base_features, dtype=np.float64)
    if base_features.ndim != 2 or base_features.shape[1] != N_FEATURES:
        raise ValueError(f"base_features must be [N, {N_FEATURES}], got {base_features.shape}")
    if base_features.shape[0] < 1:
        raise ValueError("base_features pool is empty")
    if not 0 <= feature_index < N_FEATURES:
        raise ValueError(f"feature_index must be in 0..{N_FEATURES - 1}, got {feature_index}")
    if n_trials < 1:
        raise ValueError(f"n_trials must be positive, got {n_trials}")
    rng = np.random.default_rng(seed)
    hits = np.zeros(3, dtype=np.int64)
    n_failed = 0
    for trial in range(n_trials):
        z = rng.standard_normal(latent_dim)
        base = base_features[rng.integers(base_features.shape[0])].copy()
        measured = []
        try:
            for level in LEVELS:
                feats = base.copy()
                feats[feature_index] = level
                measured.append(float(measure(render(z, feats))))
        except SilentInputError:
            n_failed += 1
            log.warning(
                "trial %d for feature %s produced silent audio, counted as failure",
                trial,
                FEATURE_NAMES[feature_index],
            )
            continue
        low, mid, high = measured
        hits += np.array([low < high, mid < high, low < mid])
    e1, e2, e3 = (hits / n_trials).tolist()
    return CoherenceResult(e1, e2, e3, n_trials, n_failed)


def _validation_pool(index: DatasetIndex) -> np.ndarray:
    val = index.split_entries("val")
    if not val:
        raise ValueError("index has no validation entries to draw base features from")
    return np.stack([e.features.values for e in val])


def coherence_for_feature(
    gen: Generator,
    net: NetConfig,
    index: DatasetIndex,
    feature_index: int,
    n_trials: int = 1000,
    seed: int = 0,
) -> CoherenceResult:
    """Run the protocol against a real generator and the feature extractor."""
    name = FEATURE_NAMES[feature_index]

    def render(z, feats):
        return render_clips(gen, net, z[None, :], feats[None, :])[0]

    def measure(clip):
        return extract_feature(clip, name)

    return coherence_test(
        render,
        measure,
        _validation_pool(index),
        feature_index,
        n_trials=n_trials,
        seed=seed,
        latent_dim=net.latent_dim,
    )


def coherence_table(
    gen: Generator,
    net: NetConfig,
    index: DatasetIndex,
    n_trials: int = 1000,
    seed: int = 0,
) -> dict:
    """CoherenceResult per feature name, in the frozen feature order."""
    return {
        name: coherence_for_feature(gen, net, index, i, n_trials=n_trials, seed=seed + i)
        for i, name in enumerate(FEATURE_NAMES)
    }
