"""Desk-scale experiment runner: corpus, training, evaluation, samples.

Builds the synthetic corpus, runs the 4-scale progressive schedule, fits
the evaluation classifier, writes the metric report plus a coherence table
and renders a few conditioned WAVs.  Everything lands under the output
directory so a run is fully inspectable afterwards:

    corpus/        synthetic dataset + index
    run/           stage checkpoints + final/
    inception/     evaluation classifier
    report.json    IS/KID/FAD per conditioning setting
    coherence.json per-feature E1/E2/E3 table
    samples/       seeded example renders

Usage: python3 scripts/run_desk_experiment.py OUT_DIR [--n 1000] [--seed 0]
                [--epochs 12] [--coherence-trials 200] [--eval-n 256]
"""

import argparse
import json
import logging
import time
from pathlib import Path

import numpy as np

from drumsynth import coherence, data, evaluate, inception, train as train_mod
from drumsynth.audio import peak_normalize, write_wav
from drumsynth.features import FEATURE_NAMES
from drumsynth.synthesis import render_clips

log = logging.getLogger("desk_experiment")

SAMPLE_CONDITIONS = {
    "soft_deep": [0.3, 0.8, 0.7, 0.2, 0.2, 0.3, 0.4],
    "bright_hard": [0.8, 0.2, 0.2, 0.3, 0.8, 0.8, 0.5],
    "rough_boomy": [0.4, 0.6, 0.8, 0.8, 0.4, 0.5, 0.5],
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out", type=Path)
    parser.add_argument("--n", type=int, default=1000, help="clips per class")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--epochs", type=int, default=12)
    parser.add_argument("--coherence-trials", type=int, default=200)
    parser.add_argument("--eval-n", type=int, default=256)
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    index = data.synth_dataset(args.n, seed=args.seed, out_dir=out / "corpus")
    log.info("corpus: %d clips (%.1fs)", len(index.entries), time.perf_counter() - t0)

    config = train_mod.TrainConfig.desk()
    t0 = time.perf_counter()
    train_mod.train(config, index, out / "run")
    log.info("training: %.1f min", (time.perf_counter() - t0) / 60)
    state = train_mod.load_checkpoint(out / "run" / "final")

    t0 = time.perf_counter()
    model, metrics = inception.train_inception(index, seed=args.seed, epochs=args.epochs)
    inception.save_inception(model, metrics, out / "inception")
    log.info("classifier: %s (%.1fs)", metrics, time.perf_counter() - t0)

    t0 = time.perf_counter()
    report = evaluate.evaluate_model(
        state.gen, config.net, index, model,
        n_samples=args.eval_n, seed=args.seed,
    )
    (out / "report.json").write_text(report.to_json())
    log.info("report written (%.1fs)", time.perf_counter() - t0)

    t0 = time.perf_counter()
    table = coherence.coherence_table(
        state.gen, config.net, index,
        n_trials=args.coherence_trials, seed=args.seed,
    )
    body = {name: result.as_dict() for name, result in table.items()}
    (out / "coherence.json").write_text(json.dumps(body, indent=2, sort_keys=True))
    for name, result in table.items():
        log.info("coherence %s: e1=%.3f e2=%.3f e3=%.3f", name, result.e1, result.e2, result.e3)
    log.info("coherence table written (%.1f min)", (time.perf_counter() - t0) / 60)

    samples = out / "samples"
    samples.mkdir(exist_ok=True)
    rng = np.random.default_rng(args.seed)
    for name, values in SAMPLE_CONDITIONS.items():
        z = rng.standard_normal((1, config.net.latent_dim))
        cond = np.array([values])
        clip = render_clips(state.gen, config.net, z, cond)[0]
        write_wav(samples / f"{name}.wav", peak_normalize(clip))
    log.info("samples under %s (conditions: %s)", samples, ", ".join(FEATURE_NAMES))


if __name__ == "__main__":
    main()
