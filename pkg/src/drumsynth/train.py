"""Progressive WGAN-GP training loop with deterministic resume.

One stage per scale: alpha ramps linearly from 0 to 1 over the stage's
fade iterations, then holds at 1.  Each step runs one critic update
(Wasserstein loss + gradient penalty + feature-regression MSE on real
inputs) followed by one generator update (adversarial loss + MSE between
the critic's feature prediction of the fake batch and the conditioning
actually used).  Conditioning vectors are always the real batch's own
extracted features.

Every random draw is derived from (seed, iteration) or (seed, stage), so
a resumed run replays the exact remaining trajectory: checkpoints store
raw float32 tensors, optimizer moments and per-parameter step counts.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import torch

from . import data
from .checkpoint import read_tensors, write_tensors
from .losses import aux_mse, gradient_penalty, wgan_losses
from .nets import Discriminator, Generator, NetConfig, build_discriminator, build_generator

log = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class StageSpec:
    batch_size: int
    fade_iters: int
    stable_iters: int

    def __post_init__(self):
        if min(self.batch_size, self.fade_iters, self.stable_iters) < 1:
            raise ValueError(f"stage counts must be positive, got {self}")

    @property
    def total(self) -> int:
        return self.fade_iters + self.stable_iters


@dataclass(frozen=True)
class ProgressiveSchedule:
    stages: tuple

    def __post_init__(self):
        if not self.stages:
            raise ValueError("schedule needs at least one stage")

    @property
    def n_stages(self) -> int:
        return len(self.stages)

    @property
    def total_iters(self) -> int:
        return sum(s.total for s in self.stages)

    def position(self, iteration: int):
        """(stage index, iteration within stage) for a global iteration."""
        if not 0 <= iteration < self.total_iters:
            raise ValueError(f"iteration {iteration} outside 0..{self.total_iters - 1}")
        for idx, stage in enumerate(self.stages):
            if iteration < stage.total:
                return idx, iteration
            iteration -= stage.total
        raise AssertionError("unreachable")

    def alpha(self, stage_idx: int, it_in_stage: int) -> float:
        # stage 0 has no coarser path to fade from
        if stage_idx == 0:
            return 1.0
        fade = self.stages[stage_idx].fade_iters
        return min(1.0, (it_in_stage + 1) / fade)

    @staticmethod
    def full() -> "ProgressiveSchedule":
        batch = (30, 30, 20, 20, 12, 12)
        stages = [StageSpec(b, 100_000, 100_000) for b in batch[:-1]]
        stages.append(StageSpec(batch[-1], 150_000, 150_000))
        return ProgressiveSchedule(tuple(stages))

    @staticmethod
    def desk(fade: int = 500, stable: int = 500, batch: int = 16) -> "ProgressiveSchedule":
        return ProgressiveSchedule(tuple(StageSpec(batch, fade, stable) for _ in range(4)))


@dataclass(frozen=True)
class TrainConfig:
    net: NetConfig
    schedule: ProgressiveSchedule
    lr: float = 1e-3
    betas: tuple = (0.0, 0.99)
    eps: float = 1e-8
    gp_weight: float = 10.0
    aux_weight: float = 1.0
    g_aux: bool = True
    seed: int = 0
    checkpoint_every: int = 0   # 0: checkpoint only at stage boundaries

    def __post_init__(self):
        if self.schedule.n_stages != self.net.n_scales:
            raise ValueError(
                f"schedule has {self.schedule.n_stages} stages but net has "
                f"{self.net.n_scales} scales"
            )

    @staticmethod
    def desk(seed: int = 0, **kwargs) -> "TrainConfig":
        return TrainConfig(net=NetConfig.desk(), schedule=ProgressiveSchedule.desk(), seed=seed, **kwargs)

    @staticmethod
    def full(seed: int = 0, **kwargs) -> "TrainConfig":
        return TrainConfig(net=NetConfig.full(), schedule=ProgressiveSchedule.full(), seed=seed, **kwargs)


@dataclass(frozen=True)
class LossReport:
    d_wasserstein: float
    d_gp: float
    d_mse: float
    g_adv: float
    g_mse: float
    d_grad_norm: float

    def items(self):
        return vars(self).items()


class Adam:
    """Adam with exposed per-parameter moments and step counts.

    Parameters that received no gradient this step are left untouched and
    their step counters do not advance, so blocks that join the forward
    path at a later scale start with fresh moments while existing
    parameters keep theirs.
    """

    def __init__(self, named_params, lr, betas=(0.0, 0.99), eps=1e-8):
        self.named = dict(named_params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.m = {n: torch.zeros_like(p) for n, p in self.named.items()}
        self.v = {n: torch.zeros_like(p) for n, p in self.named.items()}
        self.steps = {n: 0 for n in self.named}

    def zero_grad(self):
        for p in self.named.values():
            p.grad = None

    @torch.no_grad()
    def step(self):
        for name, p in self.named.items():
            if p.grad is None:
                continue
            g = p.grad
            self.steps[name] += 1
            t = self.steps[name]
            m = self.m[name].mul_(self.beta1).add_(g, alpha=1.0 - self.beta1)
            v = self.v[name].mul_(self.beta2).addcmul_(g, g, value=1.0 - self.beta2)
            m_hat = m / (1.0 - self.beta1**t)
            v_hat = v / (1.0 - self.beta2**t)
            p.add_(m_hat / (v_hat.sqrt() + self.eps), alpha=-self.lr)


@dataclass
class TrainState:
    config: TrainConfig
    gen: Generator
    disc: Discriminator
    opt_g: Adam
    opt_d: Adam
    iteration: int = 0

    @property
    def done(self) -> bool:
        return self.iteration >= self.config.schedule.total_iters

    def blend(self):
        if self.done:
            return self.config.net.n_scales - 1, 1.0
        stage, it = self.config.schedule.position(self.iteration)
        return stage, self.config.schedule.alpha(stage, it)


def new_state(config: TrainConfig) -> TrainState:
    gen = build_generator(config.net, config.seed)
    disc = build_discriminator(config.net, config.seed + 1)
    return TrainState(
        config,
        gen,
        disc,
        Adam(dict(gen.named_parameters()), config.lr, config.betas, config.eps),
        Adam(dict(disc.named_parameters()), config.lr, config.betas, config.eps),
    )


def _iter_seed(seed: int, iteration: int, stream: int) -> int:
    words = np.random.SeedSequence([seed, iteration, stream]).generate_state(2, np.uint32)
    return int(words[0]) << 31 | int(words[1] >> 1)


def _check_finite(label: str, value: float, iteration: int):
    if not math.isfinite(value):
        raise TrainingDiverged(f"{label} is {value} at iteration {iteration}")


def train_step(state: TrainState, spec_batch: np.ndarray, feat_batch: np.ndarray) -> LossReport:
    """One critic update then one generator update on a raw-unit batch."""
    cfg = state.config
    net = cfg.net
    scale, alpha = state.blend()
    tg = torch.Generator().manual_seed(_iter_seed(cfg.seed, state.iteration, 0))
    x_real = torch.from_numpy(np.ascontiguousarray(spec_batch)).float() / net.out_scale
    cond = torch.from_numpy(np.ascontiguousarray(feat_batch)).float() if net.cond_dim else None
    n = x_real.shape[0]

    z = torch.randn(n, net.latent_dim, generator=tg)
    with torch.no_grad():
        x_fake = state.gen(z, cond, scale, alpha)
    d_real, d_feat_real = state.disc(x_real, scale, alpha)
    d_fake, _ = state.disc(x_fake, scale, alpha)
    d_w, _ = wgan_losses(d_real, d_fake)
    gp, grad_norm = gradient_penalty(
        lambda xh: state.disc(xh, scale, alpha)[0],
        x_real,
        x_fake,
        generator=tg,
        weight=cfg.gp_weight,
    )
    d_mse = aux_mse(d_feat_real, cond) if net.cond_dim else torch.zeros(())
    d_total = d_w + gp + cfg.aux_weight * d_mse
    for label, value in (("d_wasserstein", d_w), ("d_gp", gp), ("d_mse", d_mse)):
        _check_finite(label, value.item(), state.iteration)
    state.opt_d.zero_grad()
    state.opt_g.zero_grad()
    d_total.backward()
    state.opt_d.step()

    z_g = torch.randn(n, net.latent_dim, generator=tg)
    x_gen = state.gen(z_g, cond, scale, alpha)
    g_score, g_feat = state.disc(x_gen, scale, alpha)
    g_adv = -g_score.mean()
    if net.cond_dim and cfg.g_aux:
        g_mse = aux_mse(g_feat, cond)
    else:
        g_mse = torch.zeros(())
    g_total = g_adv + cfg.aux_weight * g_mse
    for label, value in (("g_adv", g_adv), ("g_mse", g_mse)):
        _check_finite(label, value.item(), state.iteration)
    state.opt_d.zero_grad()
    state.opt_g.zero_grad()
    g_total.backward()
    state.opt_g.step()

    state.iteration += 1
    return LossReport(
        d_w.item(), gp.item(), d_mse.item(), g_adv.item(), g_mse.item(), grad_norm.item()
    )


def _net_to_dict(net: NetConfig) -> dict:
    return {
        "channels": list(net.channels),
        "kernel": list(net.kernel),
        "base_grid": list(net.base_grid),
        "freq_up": list(net.freq_up),
        "time_up": list(net.time_up),
        "latent_dim": net.latent_dim,
        "cond_dim": net.cond_dim,
        "out_scale": net.out_scale,
    }


def _net_from_dict(d: dict) -> NetConfig:
    return NetConfig(
        channels=tuple(d["channels"]),
        kernel=tuple(d["kernel"]),
        base_grid=tuple(d["base_grid"]),
        freq_up=tuple(bool(x) for x in d["freq_up"]),
        time_up=tuple(bool(x) for x in d["time_up"]),
        latent_dim=d["latent_dim"],
        cond_dim=d["cond_dim"],
        out_scale=d["out_scale"],
    )


def _config_to_meta(cfg: TrainConfig) -> dict:
    return {
        "net": _net_to_dict(cfg.net),
        "stages": [
            {"batch_size": s.batch_size, "fade_iters": s.fade_iters, "stable_iters": s.stable_iters}
            for s in cfg.schedule.stages
        ],
        "lr": cfg.lr,
        "betas": list(cfg.betas),
        "eps": cfg.eps,
        "gp_weight": cfg.gp_weight,
        "aux_weight": cfg.aux_weight,
        "g_aux": cfg.g_aux,
        "seed": cfg.seed,
        "checkpoint_every": cfg.checkpoint_every,
    }


def _config_from_meta(meta: dict) -> TrainConfig:
    schedule = ProgressiveSchedule(
        tuple(StageSpec(s["batch_size"], s["fade_iters"], s["stable_iters"]) for s in meta["stages"])
    )
    return TrainConfig(
        net=_net_from_dict(meta["net"]),
        schedule=schedule,
        lr=meta["lr"],
        betas=tuple(meta["betas"]),
        eps=meta["eps"],
        gp_weight=meta["gp_weight"],
        aux_weight=meta["aux_weight"],
        g_aux=meta["g_aux"],
        seed=meta["seed"],
        checkpoint_every=meta["checkpoint_every"],
    )


def save_checkpoint(state: TrainState, out_dir) -> Path:
    scale, alpha = state.blend()
    named = {}
    for prefix, module in (("gen", state.gen), ("disc", state.disc)):
        for name, tensor in module.state_dict().items():
            named[f"{prefix}.{name}"] = tensor.detach().numpy()
    for prefix, opt in (("opt_g", state.opt_g), ("opt_d", state.opt_d)):
        for name in opt.named:
            named[f"{prefix}.{name}.m"] = opt.m[name].numpy()
            named[f"{prefix}.{name}.v"] = opt.v[name].numpy()
    meta = {
        "iteration": state.iteration,
        "scale": scale,
        "alpha": alpha,
        "config": _config_to_meta(state.config),
        "opt_g_steps": state.opt_g.steps,
        "opt_d_steps": state.opt_d.steps,
    }
    write_tensors(out_dir, named, meta)
    return Path(out_dir)


def load_checkpoint(in_dir) -> TrainState:
    named, meta = read_tensors(in_dir)
    config = _config_from_meta(meta["config"])
    state = new_state(config)
    state.iteration = meta["iteration"]
    for prefix, module in (("gen", state.gen), ("disc", state.disc)):
        wanted = {}
        for name in module.state_dict():
            key = f"{prefix}.{name}"
            if key not in named:
                raise ValueError(f"checkpoint is missing tensor {key}")
            wanted[name] = torch.from_numpy(named[key])
        module.load_state_dict(wanted)
    for prefix, opt, steps_key in (
        ("opt_g", state.opt_g, "opt_g_steps"),
        ("opt_d", state.opt_d, "opt_d_steps"),
    ):
        for name in opt.named:
            opt.m[name] = torch.from_numpy(named[f"{prefix}.{name}.m"]).clone()
            opt.v[name] = torch.from_numpy(named[f"{prefix}.{name}.v"]).clone()
        opt.steps = {n: int(t) for n, t in meta[steps_key].items()}
    return state


def train(
    config: TrainConfig,
    index: data.DatasetIndex,
    out_dir,
    resume=None,
    log_every: int = 100,
) -> list:
    """Run (or resume) the progressive schedule; returns checkpoint paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if resume is not None:
        state = load_checkpoint(resume)
        config = state.config
    else:
        state = new_state(config)
    schedule = config.schedule
    lattice = config.net.lattice()
    written = []
    while not state.done:
        stage_idx, it_in_stage = schedule.position(state.iteration)
        stage = schedule.stages[stage_idx]
        stream = data.batches(
            index,
            stage_idx,
            stage.batch_size,
            np.random.default_rng(np.random.SeedSequence([config.seed, stage_idx])),
            lattice=lattice,
        )
        for _ in range(it_in_stage):   # resume mid-stage: replay batch order
            next(stream)
        while it_in_stage < stage.total:
            spec_batch, feat_batch = next(stream)
            report = train_step(state, spec_batch, feat_batch)
            it_in_stage += 1
            if log_every and state.iteration % log_every == 0:
                log.info(
                    "iter %d stage %d d_w %.4f gp %.4f d_mse %.4f g_adv %.4f g_mse %.4f",
                    state.iteration, stage_idx, report.d_wasserstein, report.d_gp,
                    report.d_mse, report.g_adv, report.g_mse,
                )
            boundary = it_in_stage == stage.total
            periodic = config.checkpoint_every and it_in_stage % config.checkpoint_every == 0
            if boundary or periodic:
                path = save_checkpoint(state, out_dir / f"ckpt_{state.iteration:08d}")
                written.append(path)
    final = save_checkpoint(state, out_dir / "final")
    written.append(final)
    return written


_CONFIG_KEYS = {
    "preset", "seed", "lr", "gp_weight", "aux_weight", "g_aux",
    "batch_size", "fade_iters", "stable_iters", "checkpoint_every", "out_scale",
}


def parse_train_config(text: str) -> TrainConfig:
    """Flat key = value config; unknown keys rejected.

    Keys: preset (desk|full), seed, lr, gp_weight, aux_weight, g_aux,
    batch_size, fade_iters, stable_iters (stage overrides applied to every
    stage), checkpoint_every, out_scale.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _CONFIG_KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        values[key] = val
    preset = values.pop("preset", "desk")
    if preset == "desk":
        config = TrainConfig.desk()
    elif preset == "full":
        config = TrainConfig.full()
    else:
        raise ValueError(f"unknown preset {preset!r}, expected desk or full")
    net = config.net
    schedule = config.schedule
    if "out_scale" in values:
        net = replace(net, out_scale=float(values.pop("out_scale")))
    stage_over = {}
    for key in ("batch_size", "fade_iters", "stable_iters"):
        if key in values:
            stage_over[key] = int(values.pop(key))
    if stage_over:
        schedule = ProgressiveSchedule(
            tuple(replace(s, **stage_over) for s in schedule.stages)
        )
    kwargs = {}
    if "seed" in values:
        kwargs["seed"] = int(values.pop("seed"))
    if "lr" in values:
        kwargs["lr"] = float(values.pop("lr"))
    if "gp_weight" in values:
        kwargs["gp_weight"] = float(values.pop("gp_weight"))
    if "aux_weight" in values:
        kwargs["aux_weight"] = float(values.pop("aux_weight"))
    if "g_aux" in values:
        flag = values.pop("g_aux").lower()
        if flag not in ("true", "false"):
            raise ValueError(f"g_aux must be true or false, got {flag!r}")
        kwargs["g_aux"] = flag == "true"
    if "checkpoint_every" in values:
        kwargs["checkpoint_every"] = int(values.pop("checkpoint_every"))
    return TrainConfig(net=net, schedule=schedule, **kwargs)
