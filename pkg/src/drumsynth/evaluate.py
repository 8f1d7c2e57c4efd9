"""Model evaluation: IS/KID/FAD per conditioning setting plus coherence.

Report JSON schema (version 1, stable):

    {
      "version": 1,
      "n_samples": <int>,
      "seed": <int>,
      "settings": {
        "real data":     {"is_mean": <float|null>, "kid": <float>, "fad": <float>},
        "train feats":   <same shape or null>,
        "val feats":     <same shape or null>,
        "rand feats":    <same shape or null>,
        "unconditional": <same shape or null>
      },
      "coherence": {<feature>: {"e1","e2","e3","n_trials","n_failed"}} | null
    }

A setting is null when it does not apply to the model under test: the
three feature-conditioned settings need cond_dim > 0, the unconditional
setting needs cond_dim == 0.  "real data" compares two halves of the
real embedding set.  is_mean is null when the inception model has no
class head.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .coherence import coherence_table
from .data import DatasetIndex
from .inception import InceptionModel, _run_batched, clip_to_input
from .metrics import fad, inception_score, kid
from .nets import Generator, NetConfig
from .synthesis import render_clips

log = logging.getLogger(__name__)

REPORT_VERSION = 1
SETTINGS = ("train feats", "val feats", "rand feats", "unconditional")


@dataclass(frozen=True)
class EvalReport:
    n_samples: int
    seed: int
    settings: dict
    coherence: dict = None

    def __post_init__(self):
        missing = {"real data", *SETTINGS} - set(self.settings)
        if missing:
            raise ValueError(f"report is missing settings: {sorted(missing)}")
        for name, row in self.settings.items():
            if row is None:
                continue
            if set(row) != {"is_mean", "kid", "fad"}:
                raise ValueError(f"setting {name!r} has keys {sorted(row)}")
            if row["fad"] < 0:
                raise ValueError(f"setting {name!r} has negative fad")
            if row["is_mean"] is not None and not 1.0 - 1e-9 <= row["is_mean"]:
                raise ValueError(f"setting {name!r} has is_mean below 1")

    def to_json(self) -> str:
        body = {
            "version": REPORT_VERSION,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "settings": self.settings,
            "coherence": self.coherence,
        }
        return json.dumps(body, indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "EvalReport":
        body = json.loads(text)
        if body.get("version") != REPORT_VERSION:
            raise ValueError(f"unsupported report version {body.get('version')}")
        return EvalReport(body["n_samples"], body["seed"], body["settings"], body["coherence"])


def _embed_and_classify(model: InceptionModel, clips, batch_size=64):
    inputs = np.stack([clip_to_input(c, model.cfg.n_mels) for c in clips])
    probs, _, emb = _run_batched(model, inputs, batch_size)
    return probs, emb


def _metric_row(probs, gen_emb, real_emb) -> dict:
    return {
        "is_mean": inception_score(probs) if probs is not None else None,
        "kid": kid(gen_emb, real_emb),
        "fad": fad(real_emb, gen_emb),
    }


def evaluate_model(
    gen: Generator,
    net: NetConfig,
    index: DatasetIndex,
    inception: InceptionModel,
    n_samples: int = 500,
    seed: int = 0,
    batch_size: int = 32,
    coherence_trials: int = 0,
) -> EvalReport:
    """Sample under each applicable conditioning source and score it."""
    if n_samples < 4:
        raise ValueError(f"n_samples must be at least 4, got {n_samples}")
    rng = np.random.default_rng(seed)
    real_clips = [index.clip(e) for e in index.entries]
    real_probs, real_emb = _embed_and_classify(inception, real_clips, batch_size)

    half = rng.permutation(real_emb.shape[0])
    a, b = real_emb[half[: len(half) // 2]], real_emb[half[len(half) // 2 :]]
    settings = {
        "real data": {
            "is_mean": inception_score(real_probs) if real_probs is not None else None,
            "kid": kid(a, b),
            "fad": fad(a, b),
        }
    }

    train_feats = np.stack([e.features.values for e in index.split_entries("train")])
    val_feats_pool = [e.features.values for e in index.split_entries("val")]
    sources = {
        "train feats": lambda: train_feats[rng.integers(len(train_feats), size=n_samples)],
        "val feats": (lambda: np.stack(val_feats_pool)[rng.integers(len(val_feats_pool), size=n_samples)])
        if val_feats_pool
        else None,
        "rand feats": lambda: rng.uniform(0.0, 1.0, size=(n_samples, 7)),
        "unconditional": None,
    }
    for name in SETTINGS:
        source = sources[name]
        conditional_setting = name != "unconditional"
        if conditional_setting != bool(net.cond_dim) or source is None and conditional_setting:
            settings[name] = None
            continue
        cond = source() if conditional_setting else None
        clips = []
        for start in range(0, n_samples, batch_size):
            count = min(batch_size, n_samples - start)
            z = rng.standard_normal((count, net.latent_dim))
            chunk = cond[start : start + count] if cond is not None else None
            clips.extend(render_clips(gen, net, z, chunk))
        probs, emb = _embed_and_classify(inception, clips, batch_size)
        settings[name] = _metric_row(probs, emb, real_emb)
        log.info(
            "%s: is=%s kid=%.4f fad=%.4f",
            name,
            "n/a" if probs is None else f"{settings[name]['is_mean']:.3f}",
            settings[name]["kid"],
            settings[name]["fad"],
        )

    if net.cond_dim and settings["rand feats"] and settings["val feats"]:
        r, v = settings["rand feats"]["kid"], settings["val feats"]["kid"]
        log.info(
            "directional check: rand-feats kid %.4f %s val-feats kid %.4f",
            r,
            ">=" if r >= v else "<",
            v,
        )

    coherence = None
    if coherence_trials > 0:
        table = coherence_table(gen, net, index, n_trials=coherence_trials, seed=seed)
        coherence = {name: result.as_dict() for name, result in table.items()}
    return EvalReport(n_samples, seed, settings, coherence)
