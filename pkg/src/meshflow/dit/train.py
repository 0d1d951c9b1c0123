"""Rectified-flow training of the DiT on encoded face-token sequences.

Tokens are re-sampled from the stored (mu, logvar) once per epoch; times come
from the logit-normal sampler; each condition is independently dropped to its
null embedding for classifier-free guidance. All draws are (seed, purpose,
step)-addressed, so runs are reproducible and resumable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch

from ..autoencoder.train import cosine_lr
from ..data import LatentRecord
from ..errors import NumericError, ValidationError
from ..flow import TimeSampler, flow_loss, sample_time, velocity_target
from ..seeding import rng as stream_rng
from ..seeding import stream_seed, torch_generator
from .model import ConditionBundle, DiT, DiTConfig, pad_batch


@dataclass
class DiTTrainConfig:
    steps: int = 6000
    batch_size: int = 16
    lr: float = 1e-4
    weight_decay: float = 0.01
    grad_clip: float = 1.0
    cond_dropout: float = 0.1
    log_every: int = 200
    checkpoint_every: int = 2000


def sample_epoch_tokens(
    latents: list[LatentRecord], seed: int, epoch: int
) -> list[torch.Tensor]:
    """One reparameterized token draw per mesh for the given epoch."""
    gen = torch_generator(seed, "latent-sample", epoch)
    tokens = []
    for r in latents:
        mu = torch.from_numpy(r.mu.astype(np.float32))
        std = torch.exp(0.5 * torch.from_numpy(r.logvar.astype(np.float32)))
        eps = torch.randn(mu.shape, generator=gen)
        tokens.append(mu + std * eps)
    return tokens


def train_dit(
    latents: list[LatentRecord],
    dit_cfg: DiTConfig,
    cfg: DiTTrainConfig,
    sampler: TimeSampler,
    seed: int,
    dit: DiT | None = None,
    features: list[torch.Tensor] | None = None,
    optimizer_state: dict | None = None,
    start_step: int = 0,
    log_fn=None,
    checkpoint_fn=None,
):
    """Returns (dit, losses) with losses covering [start_step, cfg.steps)."""
    if not latents:
        raise ValidationError("empty latent dataset")
    for r in latents:
        if r.face_count > dit_cfg.max_faces:
            raise ValidationError(
                f"face count {r.face_count} exceeds max_faces {dit_cfg.max_faces}"
            )
    if dit_cfg.use_cross_attention and features is not None:
        if len(features) != len(latents):
            raise ValidationError("features must align with latent records")

    torch.manual_seed(stream_seed(seed, "dit-init"))
    if dit is None:
        dit = DiT(dit_cfg)
    dit.train()
    params = list(dit.parameters())
    optimizer = torch.optim.AdamW(params, lr=cfg.lr, weight_decay=cfg.weight_decay)
    if optimizer_state is not None:
        optimizer.load_state_dict(optimizer_state)

    n = len(latents)
    steps_per_epoch = max(1, math.ceil(n / cfg.batch_size))
    epoch_tokens: list[torch.Tensor] = []
    current_epoch = -1

    losses: list[float] = []
    for step in range(start_step, cfg.steps):
        epoch = step // steps_per_epoch
        if epoch != current_epoch:
            epoch_tokens = sample_epoch_tokens(latents, seed, epoch)
            current_epoch = epoch

        idx = stream_rng(seed, "batch", step).integers(0, n, cfg.batch_size)
        batch = pad_batch([epoch_tokens[int(i)] for i in idx])
        b = batch.tokens.shape[0]

        t = sample_time(sampler, seed, b, step).to(torch.float32)
        x0 = torch.randn(
            batch.tokens.shape, generator=torch_generator(seed, "x0", step)
        )
        x1 = batch.tokens
        xt = t[:, None, None] * x1 + (1.0 - t[:, None, None]) * x0
        xt = xt * batch.valid[..., None]
        v_target = velocity_target(x0, x1)

        drop = stream_rng(seed, "drop", step).random((b, 2))
        conds = []
        for row, i in enumerate(idx):
            face = None if drop[row, 0] < cfg.cond_dropout else latents[int(i)].face_count
            feat = None
            if dit_cfg.use_cross_attention and features is not None:
                if drop[row, 1] >= cfg.cond_dropout:
                    feat = features[int(i)]
            conds.append(ConditionBundle(face_count=face, features=feat))

        v_pred = dit(xt, t, conds, batch.mask)
        loss = flow_loss(v_pred, v_target, batch.valid)
        if not torch.isfinite(loss):
            raise NumericError(f"non-finite DiT loss at step {step}")

        lr = cosine_lr(cfg.lr, step, cfg.steps)
        for group in optimizer.param_groups:
            group["lr"] = lr
        optimizer.zero_grad()
        loss.backward()
        torch.nn.utils.clip_grad_norm_(params, cfg.grad_clip)
        optimizer.step()

        losses.append(float(loss))
        if log_fn and (step % cfg.log_every == 0 or step == cfg.steps - 1):
            log_fn(step, {"loss": float(loss), "lr": lr})
        if checkpoint_fn and (
            (step + 1) % cfg.checkpoint_every == 0 or step == cfg.steps - 1
        ):
            checkpoint_fn(step + 1, dit, optimizer)

    dit.eval()
    return dit, losses
