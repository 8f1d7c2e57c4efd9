"""One-off calibration of the affine feature constants.

Renders a synthetic corpus, measures the raw (pre-calibration) scores of
the four descriptors whose formulas have no natural [0, 1] range, and
prints (scale, offset) pairs mapping the 5th..95th corpus percentiles onto
[0.05, 0.95].  The output was pasted into features._CAL and frozen; rerun
only if the synthesis recipes or raw formulas change.

Usage: python3 scripts/calibrate_features.py [n_per_class] [seed]
"""

import sys

import numpy as np

from drumsynth.data import CLASSES, random_spec, synth_clip
from drumsynth.features import (
    _Analysis,
    _boominess_raw,
    _hardness_raw,
    _roughness_raw,
    _sharpness_raw,
)

RAW_MEASURES = {
    "hardness": _hardness_raw,
    "roughness": _roughness_raw,
    "boominess": _boominess_raw,
    "sharpness": _sharpness_raw,
}


def main():
    n_per_class = int(sys.argv[1]) if len(sys.argv) > 1 else 150
    seed = int(sys.argv[2]) if len(sys.argv) > 2 else 2024
    rng = np.random.default_rng(seed)
    raw = {name: [] for name in RAW_MEASURES}
    for drum_class in CLASSES:
        for _ in range(n_per_class):
            an = _Analysis(synth_clip(random_spec(drum_class, rng)))
            for name, fn in RAW_MEASURES.items():
                raw[name].append(fn(an))
    print(f"corpus: {n_per_class} per class, seed {seed}\n")
    print("_CAL = {")
    for name, values in raw.items():
        v = np.array(values)
        p5, p50, p95 = np.percentile(v, [5, 50, 95])
        scale = 0.9 / (p95 - p5)
        offset = 0.05 - scale * p5
        print(f'    "{name}": ({scale:.4f}, {offset:.4f}),'
              f"  # raw p5/p50/p95 = {p5:.3f}/{p50:.3f}/{p95:.3f}")
    print("}")


if __name__ == "__main__":
    main()
