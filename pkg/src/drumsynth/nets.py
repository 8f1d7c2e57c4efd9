"""Progressive generator/discriminator pair over STFT tensors.

Both nets grow through a shared ladder of scale blocks.  The generator
maps a (latent + conditioning) vector, placed at the center cell of the
base grid, through an input block and N scale blocks, each optionally
doubling the frequency and/or time axes; a per-scale 1x1 head emits the
2-channel real/imag tensor.  The discriminator mirrors the ladder with
per-scale input heads, mean-pool downsampling, a minibatch-stddev channel
before its output block, and two linear heads: the scalar critic score
and the feature-regression vector.

During fade-in of scale s the generator blends (1-alpha) times the
box-upsampled previous head with alpha times the new head; the
discriminator symmetrically blends its s and s-1 input paths.

Weights are stored as raw standard normals and multiplied by
sqrt(2/fan_in) at every forward pass (equalized learning rate); biases
start at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
import torch.nn.functional as F
from torch import nn

from .spectral import ScaleLattice

LEAK = 0.2
PIXEL_NORM_EPS = 1e-8


def equalized_scale(fan_in: int) -> float:
    if fan_in <= 0:
        raise ValueError(f"fan_in must be positive, got {fan_in}")
    return math.sqrt(2.0 / fan_in)


def pixel_norm(x: torch.Tensor, eps: float = PIXEL_NORM_EPS) -> torch.Tensor:
    """Normalize each (f, t) position to unit RMS across channels."""
    return x / torch.sqrt(x.pow(2).mean(dim=-3, keepdim=True) + eps)


def minibatch_stddev(batch: torch.Tensor) -> torch.Tensor:
    """Append one channel holding the batch-wide mean feature stddev."""
    if batch.ndim != 4:
        raise ValueError(f"expected [N,C,F,T] batch, got shape {tuple(batch.shape)}")
    var = batch.var(dim=0, unbiased=False)
    # sqrt has an infinite derivative at zero variance, which the first
    # convolutions hit wherever the latent's receptive field does not reach;
    # route a zero subgradient there while keeping the exact forward value
    nonzero = var > 0
    std = torch.where(nonzero, var, torch.ones_like(var)).sqrt() * nonzero.to(var.dtype)
    stat = std.mean()
    extra = stat.expand(batch.shape[0], 1, batch.shape[2], batch.shape[3])
    return torch.cat([batch, extra], dim=1)


def box_upsample(x: torch.Tensor, f_factor: int, t_factor: int) -> torch.Tensor:
    return x.repeat_interleave(f_factor, dim=-2).repeat_interleave(t_factor, dim=-1)


def box_downsample(x: torch.Tensor, f_factor: int, t_factor: int) -> torch.Tensor:
    if f_factor == 1 and t_factor == 1:
        return x
    return F.avg_pool2d(x, (f_factor, t_factor))


@dataclass(frozen=True)
class NetConfig:
    """Shared shape/capacity settings for one generator/discriminator pair."""

    channels: tuple = (256, 128, 128, 128, 64, 32)
    kernel: tuple = (3, 3)
    base_grid: tuple = (16, 4)
    freq_up: tuple = (True, True, True, True, True, True)
    time_up: tuple = (False, False, False, True, True, True)
    latent_dim: int = 128
    cond_dim: int = 7
    out_scale: float = 128.0   # maps the net's unit range onto raw STFT units

    def __post_init__(self):
        n = len(self.channels)
        if n < 1:
            raise ValueError("need at least one scale block")
        if len(self.freq_up) != n or len(self.time_up) != n:
            raise ValueError("freq_up/time_up must match channels in length")
        if self.latent_dim < 1 or self.cond_dim < 0:
            raise ValueError("latent_dim must be >= 1 and cond_dim >= 0")

    @property
    def n_scales(self) -> int:
        return len(self.channels)

    def block_factors(self, scale: int) -> tuple:
        return (2 if self.freq_up[scale] else 1, 2 if self.time_up[scale] else 1)

    def grid(self, scale: int) -> tuple:
        f, t = self.base_grid
        for s in range(scale + 1):
            ff, tf = self.block_factors(s)
            f, t = f * ff, t * tf
        return f, t

    def lattice(self) -> ScaleLattice:
        return ScaleLattice(tuple(self.grid(s) for s in range(self.n_scales)))

    @staticmethod
    def full() -> "NetConfig":
        return NetConfig()

    @staticmethod
    def desk(cond_dim: int = 7) -> "NetConfig":
        return NetConfig(
            channels=(128, 64, 32, 16),
            freq_up=(False, True, True, True),
            time_up=(False, False, True, True),
            cond_dim=cond_dim,
        )


def _check_blend(cfg: NetConfig, scale: int, alpha: float) -> None:
    if not 0 <= scale < cfg.n_scales:
        raise ValueError(f"scale {scale} out of range 0..{cfg.n_scales - 1}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha {alpha} outside [0, 1]")


class EqualizedConv2d(nn.Module):
    """Conv with raw N(0,1) weights rescaled by sqrt(2/fan_in) per forward."""

    def __init__(self, in_ch, out_ch, kernel, generator):
        super().__init__()
        kh, kw = kernel
        self.weight = nn.Parameter(torch.randn(out_ch, in_ch, kh, kw, generator=generator))
        self.bias = nn.Parameter(torch.zeros(out_ch))
        self.scale = equalized_scale(in_ch * kh * kw)
        self.padding = (kh // 2, kw // 2)

    def forward(self, x):
        return F.conv2d(x, self.weight * self.scale, self.bias, padding=self.padding)


class EqualizedLinear(nn.Module):
    def __init__(self, in_dim, out_dim, generator):
        super().__init__()
        self.weight = nn.Parameter(torch.randn(out_dim, in_dim, generator=generator))
        self.bias = nn.Parameter(torch.zeros(out_dim))
        self.scale = equalized_scale(in_dim)

    def forward(self, x):
        return F.linear(x, self.weight * self.scale, self.bias)


class _GenBlock(nn.Module):
    def __init__(self, in_ch, out_ch, kernel, factors, generator):
        super().__init__()
        self.factors = factors
        self.conv1 = EqualizedConv2d(in_ch, out_ch, kernel, generator)
        self.conv2 = EqualizedConv2d(out_ch, out_ch, kernel, generator)

    def forward(self, x):
        x = box_upsample(x, *self.factors)
        x = pixel_norm(F.leaky_relu(self.conv1(x), LEAK))
        return pixel_norm(F.leaky_relu(self.conv2(x), LEAK))


class Generator(nn.Module):
    def __init__(self, cfg: NetConfig, generator):
        super().__init__()
        self.cfg = cfg
        ch0 = cfg.channels[0]
        in_dim = cfg.latent_dim + cfg.cond_dim
        self.input_conv1 = EqualizedConv2d(in_dim, ch0, cfg.kernel, generator)
        self.input_conv2 = EqualizedConv2d(ch0, ch0, cfg.kernel, generator)
        self.blocks = nn.ModuleList(
            _GenBlock(
                cfg.channels[s - 1] if s else ch0,
                cfg.channels[s],
                cfg.kernel,
                cfg.block_factors(s),
                generator,
            )
            for s in range(cfg.n_scales)
        )
        self.heads = nn.ModuleList(
            EqualizedConv2d(cfg.channels[s], 2, (1, 1), generator)
            for s in range(cfg.n_scales)
        )

    def forward(self, z: torch.Tensor, c, scale: int, alpha: float = 1.0) -> torch.Tensor:
        cfg = self.cfg
        _check_blend(cfg, scale, alpha)
        if z.ndim != 2 or z.shape[1] != cfg.latent_dim:
            raise ValueError(f"z must be [N,{cfg.latent_dim}], got {tuple(z.shape)}")
        if not torch.isfinite(z).all():
            raise ValueError("latent contains non-finite values")
        if cfg.cond_dim:
            if c is None or c.shape != (z.shape[0], cfg.cond_dim):
                raise ValueError(f"c must be [N,{cfg.cond_dim}]")
            if not torch.isfinite(c).all():
                raise ValueError("conditioning contains non-finite values")
            vec = torch.cat([z, c.to(z.dtype)], dim=1)
        else:
            vec = z
        bf, bt = cfg.base_grid
        x = z.new_zeros(z.shape[0], vec.shape[1], bf, bt)
        x[:, :, bf // 2, bt // 2] = vec
        h = F.relu(self.input_conv1(x))
        h = F.relu(self.input_conv2(h))
        prev = None
        for s in range(scale + 1):
            prev = h
            h = self.blocks[s](h)
        out = self.heads[scale](h)
        if alpha < 1.0 and scale > 0:
            coarse = box_upsample(self.heads[scale - 1](prev), *cfg.block_factors(scale))
            out = (1.0 - alpha) * coarse + alpha * out
        return out


class _DiscBlock(nn.Module):
    def __init__(self, in_ch, out_ch, kernel, factors, generator):
        super().__init__()
        self.factors = factors
        self.conv1 = EqualizedConv2d(in_ch, in_ch, kernel, generator)
        self.conv2 = EqualizedConv2d(in_ch, out_ch, kernel, generator)

    def forward(self, x):
        x = F.leaky_relu(self.conv1(x), LEAK)
        x = F.leaky_relu(self.conv2(x), LEAK)
        return box_downsample(x, *self.factors)


class Discriminator(nn.Module):
    def __init__(self, cfg: NetConfig, generator):
        super().__init__()
        self.cfg = cfg
        ch0 = cfg.channels[0]
        self.input_heads = nn.ModuleList(
            EqualizedConv2d(2, cfg.channels[s], (1, 1), generator)
            for s in range(cfg.n_scales)
        )
        self.blocks = nn.ModuleList(
            _DiscBlock(
                cfg.channels[s],
                cfg.channels[s - 1] if s else ch0,
                cfg.kernel,
                cfg.block_factors(s),
                generator,
            )
            for s in range(cfg.n_scales)
        )
        self.out_conv = EqualizedConv2d(ch0 + 1, ch0, cfg.kernel, generator)
        flat = ch0 * cfg.base_grid[0] * cfg.base_grid[1]
        self.score_head = EqualizedLinear(flat, 1, generator)
        self.feat_head = EqualizedLinear(flat, cfg.cond_dim, generator) if cfg.cond_dim else None

    def forward(self, x: torch.Tensor, scale: int, alpha: float = 1.0):
        cfg = self.cfg
        _check_blend(cfg, scale, alpha)
        f, t = cfg.grid(scale)
        if x.ndim != 4 or x.shape[1:] != (2, f, t):
            raise ValueError(
                f"input shape {tuple(x.shape)} does not match [N,2,{f},{t}] at scale {scale}"
            )
        if not torch.isfinite(x).all():
            raise ValueError("discriminator input contains non-finite values")
        h = F.leaky_relu(self.input_heads[scale](x), LEAK)
        h = self.blocks[scale](h)
        if alpha < 1.0 and scale > 0:
            down = box_downsample(x, *cfg.block_factors(scale))
            h_old = F.leaky_relu(self.input_heads[scale - 1](down), LEAK)
            h = alpha * h + (1.0 - alpha) * h_old
        for s in range(scale - 1, -1, -1):
            h = self.blocks[s](h)
        h = minibatch_stddev(h)
        h = F.leaky_relu(self.out_conv(h), LEAK)
        flat = h.flatten(1)
        score = self.score_head(flat).squeeze(1)
        feats = self.feat_head(flat) if self.feat_head is not None else None
        return score, feats


def build_generator(cfg: NetConfig, seed: int) -> Generator:
    g = torch.Generator().manual_seed(seed)
    return Generator(cfg, g)


def build_discriminator(cfg: NetConfig, seed: int) -> Discriminator:
    g = torch.Generator().manual_seed(seed)
    return Discriminator(cfg, g)
