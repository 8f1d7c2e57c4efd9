"""Conditional drum-sound synthesis: progressive GAN over STFT tensors.

Subpackage map:

- audio: canonical clip type, WAV I/O, resampling, standardization
- spectral: STFT analysis/synthesis, scale lattice, mel magnitudes
- features: perceptual feature extraction (7 timbre descriptors)
- nets: generator/discriminator with progressive growing
- latent: latent-space sampling and interpolation
- losses: Wasserstein losses, gradient penalty, feature regression
- data: synthetic corpus, ingestion, batching
- train: progressive training loop with deterministic resume
- checkpoint: portable tensor serialization
- inception: embedding/classifier network for evaluation
- metrics: IS, FAD, KID and the evaluation report
- coherence: ordinal control-coherence experiments
- service: HTTP interface
- cli: command-line entry points
"""

__version__ = "0.1.0"
