"""Wasserstein losses, gradient penalty and the feature-regression term."""

from __future__ import annotations

import torch

GP_WEIGHT = 10.0


def wgan_losses(d_real: torch.Tensor, d_fake: torch.Tensor):
    """(critic loss, generator loss) from per-sample critic scores.

    The critic maximizes mean(real) - mean(fake); both returned losses are
    arranged for minimization.
    """
    if d_real.numel() == 0 or d_fake.numel() == 0:
        raise ValueError("score batches must be non-empty")
    if d_real.shape != d_fake.shape:
        raise ValueError(f"score batches differ in shape: {d_real.shape} vs {d_fake.shape}")
    d_loss = d_fake.mean() - d_real.mean()
    g_loss = -d_fake.mean()
    return d_loss, g_loss


def gradient_penalty(
    critic,
    x_real: torch.Tensor,
    x_fake: torch.Tensor,
    generator: torch.Generator = None,
    weight: float = GP_WEIGHT,
):
    """Two-sided WGAN-GP penalty on random real/fake interpolates.

    critic maps a batch to per-sample scores; u ~ U(0,1) is drawn per
    sample.  Returns (penalty, mean gradient norm); the penalty keeps the
    graph alive for backprop through the critic's parameters.
    """
    if x_real.shape != x_fake.shape:
        raise ValueError(f"shape mismatch: {tuple(x_real.shape)} vs {tuple(x_fake.shape)}")
    n = x_real.shape[0]
    u_shape = (n,) + (1,) * (x_real.ndim - 1)
    u = torch.rand(u_shape, dtype=x_real.dtype, generator=generator)
    x_hat = (u * x_real + (1.0 - u) * x_fake).detach().requires_grad_(True)
    scores = critic(x_hat)
    grads = torch.autograd.grad(
        outputs=scores.sum(), inputs=x_hat, create_graph=True
    )[0]
    norms = grads.flatten(1).norm(dim=1)
    return weight * ((norms - 1.0) ** 2).mean(), norms.mean()


def aux_mse(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Mean squared componentwise feature-regression error."""
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {tuple(pred.shape)} vs {tuple(target.shape)}")
    return (pred - target.to(pred.dtype)).pow(2).mean()
