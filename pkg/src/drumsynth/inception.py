"""Evaluation classifier over mel spectrograms.

A small fixed CNN (six 3x3 conv blocks, leaky ReLU, 2x2 mean pooling
while the grid allows, global average pool) feeding a 128-d embedding
layer with two heads: 3-class drum-type softmax and 7-dim feature
regression.  The embedding feeds FAD/KID; the class head feeds the
inception score.  A regression-only variant (n_classes=0) covers corpora
without drum-type labels.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from .audio import AudioClip
from .checkpoint import read_tensors, write_tensors
from .data import CLASSES, DatasetIndex
from .spectral import N_FRAMES, mel_magnitude, stft

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class InceptionConfig:
    n_mels: int = 64
    channels: tuple = (16, 24, 32, 48, 64, 96)
    emb_dim: int = 128
    n_classes: int = 3
    n_feats: int = 7

    def __post_init__(self):
        if self.n_mels < 4 or not self.channels:
            raise ValueError(f"bad config {self}")
        if self.n_classes < 0 or self.n_feats < 1 or self.emb_dim < 1:
            raise ValueError(f"bad config {self}")


class InceptionModel(nn.Module):
    def __init__(self, cfg: InceptionConfig, generator: torch.Generator):
        super().__init__()
        self.cfg = cfg
        convs = []
        prev = 1
        grid = (cfg.n_mels, N_FRAMES)
        self.pool_after = []
        for ch in cfg.channels:
            convs.append(nn.Conv2d(prev, ch, 3, padding=1))
            pool = grid[0] >= 2 and grid[1] >= 2
            self.pool_after.append(pool)
            if pool:
                grid = (grid[0] // 2, grid[1] // 2)
            prev = ch
        self.convs = nn.ModuleList(convs)
        self.emb_layer = nn.Linear(prev, cfg.emb_dim)
        self.class_head = nn.Linear(cfg.emb_dim, cfg.n_classes) if cfg.n_classes else None
        self.feat_head = nn.Linear(cfg.emb_dim, cfg.n_feats)
        with torch.no_grad():
            for module in self.modules():
                if isinstance(module, (nn.Conv2d, nn.Linear)):
                    fan_in = module.weight[0].numel()
                    module.weight.copy_(
                        torch.randn(module.weight.shape, generator=generator)
                        * (2.0 / fan_in) ** 0.5
                    )
                    module.bias.zero_()

    def forward(self, x: torch.Tensor):
        cfg = self.cfg
        if x.ndim != 4 or x.shape[1] != 1 or x.shape[2] != cfg.n_mels:
            raise ValueError(f"expected [N, 1, {cfg.n_mels}, T] input, got {tuple(x.shape)}")
        h = x
        for conv, pool in zip(self.convs, self.pool_after):
            h = F.leaky_relu(conv(h), 0.2)
            if pool:
                h = F.avg_pool2d(h, 2)
        h = h.mean(dim=(2, 3))
        emb = F.leaky_relu(self.emb_layer(h), 0.2)
        logits = self.class_head(emb) if self.class_head is not None else None
        return logits, self.feat_head(emb), emb


def clip_to_input(clip: AudioClip, n_mels: int = 64) -> np.ndarray:
    """Mel magnitude image for one clip, shaped [1, n_mels, frames]."""
    return mel_magnitude(stft(clip), n_mels).data[None, :, :]


def _index_inputs(index: DatasetIndex, entries, n_mels: int) -> np.ndarray:
    return np.stack([clip_to_input(index.clip(e), n_mels) for e in entries])


def _run_batched(model: InceptionModel, inputs: np.ndarray, batch_size: int = 64):
    logits_all, feats_all, emb_all = [], [], []
    model.eval()
    with torch.no_grad():
        for start in range(0, inputs.shape[0], batch_size):
            chunk = torch.from_numpy(inputs[start : start + batch_size]).float()
            logits, feats, emb = model(chunk)
            logits_all.append(logits)
            feats_all.append(feats)
            emb_all.append(emb)
    feats = torch.cat(feats_all).numpy().astype(np.float64)
    emb = torch.cat(emb_all).numpy().astype(np.float64)
    if logits_all[0] is None:
        return None, feats, emb
    probs = torch.softmax(torch.cat(logits_all), dim=1).numpy().astype(np.float64)
    return probs, feats, emb


def embed_clips(model: InceptionModel, clips, batch_size: int = 64) -> np.ndarray:
    inputs = np.stack([clip_to_input(c, model.cfg.n_mels) for c in clips])
    return _run_batched(model, inputs, batch_size)[2]


def classify_clips(model: InceptionModel, clips, batch_size: int = 64) -> np.ndarray:
    if model.class_head is None:
        raise ValueError("this model was trained without class labels")
    inputs = np.stack([clip_to_input(c, model.cfg.n_mels) for c in clips])
    return _run_batched(model, inputs, batch_size)[0]


def predict_features(model: InceptionModel, clips, batch_size: int = 64) -> np.ndarray:
    inputs = np.stack([clip_to_input(c, model.cfg.n_mels) for c in clips])
    return _run_batched(model, inputs, batch_size)[1]


def train_inception(
    index: DatasetIndex,
    cfg: InceptionConfig = None,
    seed: int = 0,
    epochs: int = 30,
    batch_size: int = 32,
    lr: float = 1e-3,
):
    """Fit the classifier on the index's train split; returns (model, val metrics).

    With cfg.n_classes == 0 only the feature-regression loss is used, so
    unlabeled corpora train the embedding for FAD/KID without class
    targets.
    """
    if cfg is None:
        cfg = InceptionConfig()
    train_entries = index.split_entries("train")
    val_entries = index.split_entries("val")
    if not train_entries or not val_entries:
        raise ValueError("index needs non-empty train and val splits")
    if cfg.n_classes:
        labels = {e.drum_class for e in index.entries}
        if None in labels:
            raise ValueError("classification training requires drum-class labels")
        if len(labels) < 2:
            raise ValueError(f"degenerate dataset: single class {labels}")
    x_train = _index_inputs(index, train_entries, cfg.n_mels)
    x_val = _index_inputs(index, val_entries, cfg.n_mels)
    feat_train = np.stack([e.features.values for e in train_entries])
    feat_val = np.stack([e.features.values for e in val_entries])
    model = InceptionModel(cfg, torch.Generator().manual_seed(seed))
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    rng = np.random.default_rng(seed)
    y_train = y_val = None
    if cfg.n_classes:
        y_train = torch.tensor([CLASSES.index(e.drum_class) for e in train_entries])
        y_val = torch.tensor([CLASSES.index(e.drum_class) for e in val_entries])
    model.train()
    for epoch in range(epochs):
        order = rng.permutation(len(train_entries))
        for start in range(0, len(order), batch_size):
            sel = order[start : start + batch_size]
            xb = torch.from_numpy(x_train[sel]).float()
            fb = torch.from_numpy(feat_train[sel]).float()
            logits, feat_pred, _ = model(xb)
            loss = F.mse_loss(feat_pred, fb)
            if cfg.n_classes:
                loss = loss + F.cross_entropy(logits, y_train[sel])
            opt.zero_grad()
            loss.backward()
            opt.step()
    probs, feat_pred, _ = _run_batched(model, x_val)
    metrics = {"val_feature_mse": float(np.mean((feat_pred - feat_val) ** 2))}
    if cfg.n_classes:
        accuracy = float((probs.argmax(axis=1) == y_val.numpy()).mean())
        metrics["val_accuracy"] = accuracy
        log.info("inception val accuracy %.3f mse %.4f", accuracy, metrics["val_feature_mse"])
    else:
        log.info("inception val mse %.4f", metrics["val_feature_mse"])
    return model, metrics


def save_inception(model: InceptionModel, metrics: dict, out_dir) -> None:
    named = {name: tensor.detach().numpy() for name, tensor in model.state_dict().items()}
    cfg = model.cfg
    meta = {
        "kind": "inception",
        "config": {
            "n_mels": cfg.n_mels,
            "channels": list(cfg.channels),
            "emb_dim": cfg.emb_dim,
            "n_classes": cfg.n_classes,
            "n_feats": cfg.n_feats,
        },
        "metrics": metrics,
    }
    write_tensors(out_dir, named, meta)


def load_inception(in_dir):
    named, meta = read_tensors(in_dir)
    if meta.get("kind") != "inception":
        raise ValueError(f"{in_dir} does not hold an inception model")
    raw = meta["config"]
    cfg = InceptionConfig(
        n_mels=raw["n_mels"],
        channels=tuple(raw["channels"]),
        emb_dim=raw["emb_dim"],
        n_classes=raw["n_classes"],
        n_feats=raw["n_feats"],
    )
    model = InceptionModel(cfg, torch.Generator().manual_seed(0))
    model.load_state_dict({name: torch.from_numpy(arr) for name, arr in named.items()})
    model.eval()
    return model, meta["metrics"]
