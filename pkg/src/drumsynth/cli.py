"""Command-line interface binding all modules.

Subcommands: features, synth-data, ingest, train, train-inception, eval,
coherence, generate, serve.  Domain errors print one line to stderr and
exit 1; argument errors exit 2 (argparse convention).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import coherence as coherence_mod
from . import data, evaluate, inception, service, train as train_mod
from .audio import peak_normalize, read_wav, standardize, write_wav
from .features import FEATURE_NAMES, extract_raw
from .synthesis import render_clips

log = logging.getLogger(__name__)


def _cmd_features(args) -> int:
    clip = standardize(read_wav(args.wav))
    raw = extract_raw(clip)
    print(json.dumps({name: raw[name] for name in FEATURE_NAMES}, indent=2))
    return 0


def _cmd_synth_data(args) -> int:
    index = data.synth_dataset(args.n, seed=args.seed, out_dir=args.out)
    print(f"wrote {len(index.entries)} entries to {args.out}")
    return 0


def _cmd_ingest(args) -> int:
    index = data.ingest(args.in_dir, args.out, seed=args.seed)
    n_val = len(index.split_entries("val"))
    print(f"indexed {len(index.entries)} clips ({n_val} validation) at {args.out}")
    return 0


def _cmd_train(args) -> int:
    config = train_mod.parse_train_config(Path(args.config).read_text() if args.config else "")
    index = data.DatasetIndex.load(args.data)
    written = train_mod.train(config, index, args.out, resume=args.resume)
    print(f"training complete, {len(written)} checkpoints under {args.out}")
    return 0


def _cmd_train_inception(args) -> int:
    index = data.DatasetIndex.load(args.data)
    cfg = inception.InceptionConfig(n_classes=0) if args.regression_only else None
    model, metrics = inception.train_inception(
        index, cfg=cfg, seed=args.seed, epochs=args.epochs
    )
    inception.save_inception(model, metrics, args.out)
    print(f"saved inception model to {args.out}: {json.dumps(metrics)}")
    return 0


def _cmd_eval(args) -> int:
    snapshot = service.load_snapshot(args.ckpt)
    index = data.DatasetIndex.load(args.data)
    model, _ = inception.load_inception(args.inception)
    report = evaluate.evaluate_model(
        snapshot.gen,
        snapshot.net,
        index,
        model,
        n_samples=args.n,
        seed=args.seed,
        coherence_trials=args.coherence_trials,
    )
    Path(args.report).write_text(report.to_json())
    print(f"wrote report to {args.report}")
    return 0


def _cmd_coherence(args) -> int:
    snapshot = service.load_snapshot(args.ckpt)
    index = data.DatasetIndex.load(args.data)
    table = coherence_mod.coherence_table(
        snapshot.gen, snapshot.net, index, n_trials=args.n, seed=args.seed
    )
    body = {name: result.as_dict() for name, result in table.items()}
    Path(args.report).write_text(json.dumps(body, indent=2, sort_keys=True))
    print(f"wrote coherence table to {args.report}")
    return 0


def _parse_feature_list(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != len(FEATURE_NAMES):
        raise ValueError(f"--features needs {len(FEATURE_NAMES)} comma-separated values")
    values = np.array([float(p) for p in parts])
    if values.min() < 0.0 or values.max() > 1.0:
        raise ValueError("--features values must lie in [0, 1]")
    return values


def _cmd_generate(args) -> int:
    snapshot = service.load_snapshot(args.ckpt)
    cond = None
    if snapshot.net.cond_dim:
        if args.features is None:
            raise ValueError("this checkpoint is feature-conditioned, pass --features")
        cond = np.tile(_parse_feature_list(args.features), (args.count, 1))
    rng = np.random.default_rng(args.seed)
    z = rng.standard_normal((args.count, snapshot.net.latent_dim))
    clips = render_clips(snapshot.gen, snapshot.net, z, cond)
    out = Path(args.out)
    for i, clip in enumerate(clips):
        path = out if args.count == 1 else out.with_stem(f"{out.stem}_{i:03d}")
        write_wav(path, peak_normalize(clip))
        print(f"wrote {path}")
    return 0


def _cmd_serve(args) -> int:
    service.serve(args.ckpt, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="drumsynth", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("features", help="print raw [0,100] features of a WAV")
    p.add_argument("wav")
    p.set_defaults(func=_cmd_features)

    p = sub.add_parser("synth-data", help="generate the synthetic corpus and index it")
    p.add_argument("--n", type=int, required=True, help="clips per class")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth_data)

    p = sub.add_parser("ingest", help="index a directory of WAV files")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("train", help="run the progressive training schedule")
    p.add_argument("--config", help="flat key=value file; defaults to the desk preset")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--resume")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("train-inception", help="fit the evaluation classifier")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--regression-only", action="store_true")
    p.set_defaults(func=_cmd_train_inception)

    p = sub.add_parser("eval", help="score a checkpoint with IS/KID/FAD")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--inception", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--coherence-trials", type=int, default=0)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("coherence", help="run the feature-coherence protocol")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", required=True)
    p.set_defaults(func=_cmd_coherence)

    p = sub.add_parser("generate", help="render clips from a checkpoint")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--features", help="7 comma-separated values in [0,1]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("serve", help="start the HTTP generation service")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
