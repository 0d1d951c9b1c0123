"""VAE training loop: cross-entropy reconstruction + KL regularizer.

All randomness is drawn from named (seed, purpose, step) streams, so a run is
bitwise reproducible on a single thread and can resume from a checkpoint with
an identical subsequent trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import torch

from ..errors import NumericError, ValidationError
from ..geometry import (
    CanonicalMesh,
    augment,
    build_adjacency,
    canonicalize,
    dequantize,
    encoder_features,
    face_attributes,
)
from ..nn import padding_mask
from ..seeding import rng as stream_rng
from ..seeding import stream_seed, torch_generator
from .model import (
    DecoderConfig,
    EncoderConfig,
    FaceTokenDecoder,
    FaceTokenEncoder,
    masked_reconstruction_loss,
    recon_metrics_from_bins,
    reconstruct_bins,
)


@dataclass
class VAETrainConfig:
    steps: int = 6000
    batch_size: int = 8
    lr: float = 1e-4
    weight_decay: float = 0.01
    grad_clip: float = 1.0
    lambda_kl: float = 1e-4
    log_every: int = 200
    checkpoint_every: int = 2000
    augment: bool = False
    augment_scale: tuple[float, float] = (0.95, 1.05)
    augment_rotate: bool = True


@dataclass
class PreparedMesh:
    features: np.ndarray  # (n, 16)
    adj_norm: np.ndarray  # (n, n)
    bins: np.ndarray      # (n, 9)

    @property
    def n(self) -> int:
        return len(self.bins)


def prepare_mesh(cm: CanonicalMesh) -> PreparedMesh:
    attrs = face_attributes(cm)
    return PreparedMesh(
        features=encoder_features(attrs, cm.n),
        adj_norm=build_adjacency(cm).normalized_dense(),
        bins=cm.face_bins(),
    )


def collate(prepared: list[PreparedMesh], dtype=torch.float32):
    """Zero-pad a list of prepared meshes into batch tensors.

    Returns (features (B,L,16), adj (B,L,L), bins (B,L,9), valid (B,L) bool,
    attention mask (B,L) additive). Padded adjacency rows are all-zero, so the
    GCN emits zeros there.
    """
    lengths = [p.n for p in prepared]
    L = max(lengths)
    B = len(prepared)
    features = torch.zeros(B, L, 16, dtype=dtype)
    adj = torch.zeros(B, L, L, dtype=dtype)
    bins = torch.zeros(B, L, 9, dtype=torch.long)
    for i, p in enumerate(prepared):
        n = p.n
        features[i, :n] = torch.from_numpy(p.features).to(dtype)
        adj[i, :n, :n] = torch.from_numpy(p.adj_norm).to(dtype)
        bins[i, :n] = torch.from_numpy(p.bins)
    valid = torch.arange(L)[None, :] < torch.as_tensor(lengths)[:, None]
    mask = padding_mask(lengths, L, dtype=dtype)
    return features, adj, bins, valid, mask


def cosine_lr(base: float, step: int, total: int) -> float:
    return base * 0.5 * (1.0 + math.cos(math.pi * min(step, total) / total))


def masked_kl(mu: torch.Tensor, logvar: torch.Tensor, valid: torch.Tensor) -> torch.Tensor:
    elem = 0.5 * (mu.pow(2) + logvar.exp() - logvar)
    keep = valid[..., None].expand_as(elem)
    return elem[keep].sum() / int(keep.sum())


def train_vae(
    meshes: list[CanonicalMesh],
    enc_cfg: EncoderConfig,
    dec_cfg: DecoderConfig,
    cfg: VAETrainConfig,
    seed: int,
    encoder: FaceTokenEncoder | None = None,
    decoder: FaceTokenDecoder | None = None,
    optimizer_state: dict | None = None,
    start_step: int = 0,
    log_fn=None,
    checkpoint_fn=None,
):
    """Returns (encoder, decoder, losses). ``losses`` covers steps
    [start_step, cfg.steps); pass a checkpointed model + optimizer state and
    start_step to resume with an identical trajectory."""
    if not meshes:
        raise ValidationError("empty training set")
    if enc_cfg.latent_dim != dec_cfg.latent_dim:
        raise ValidationError("encoder/decoder latent dims differ")

    torch.manual_seed(stream_seed(seed, "vae-init"))
    if encoder is None:
        encoder = FaceTokenEncoder(enc_cfg)
    if decoder is None:
        decoder = FaceTokenDecoder(dec_cfg)
    encoder.train()
    decoder.train()

    params = list(encoder.parameters()) + list(decoder.parameters())
    optimizer = torch.optim.AdamW(params, lr=cfg.lr, weight_decay=cfg.weight_decay)
    if optimizer_state is not None:
        optimizer.load_state_dict(optimizer_state)

    base_prepared = [prepare_mesh(cm) for cm in meshes]
    resolution = meshes[0].resolution

    def prepared_for(step: int, slot: int, index: int) -> PreparedMesh:
        if not cfg.augment:
            return base_prepared[index]
        aug_seed = stream_seed(seed, "augment", step * cfg.batch_size + slot)
        mesh = augment(
            dequantize(meshes[index]),
            seed=aug_seed,
            scale_range=cfg.augment_scale,
            rotate=cfg.augment_rotate,
        )
        return prepare_mesh(canonicalize(mesh, resolution))

    losses: list[float] = []
    for step in range(start_step, cfg.steps):
        idx = stream_rng(seed, "batch", step).integers(0, len(meshes), cfg.batch_size)
        batch = [prepared_for(step, s, int(i)) for s, i in enumerate(idx)]
        features, adj, bins, valid, mask = collate(batch)

        mu, logvar = encoder(features, adj, mask)
        eps = torch.randn(
            mu.shape, generator=torch_generator(seed, "reparam", step), dtype=mu.dtype
        )
        tokens = mu + torch.exp(0.5 * logvar) * eps
        tokens = tokens * valid[..., None]
        logits = decoder(tokens, mask)

        ce = masked_reconstruction_loss(logits, bins, valid)
        kl = masked_kl(mu, logvar, valid)
        loss = ce + cfg.lambda_kl * kl
        if not torch.isfinite(loss):
            raise NumericError(f"non-finite VAE loss at step {step}")

        lr = cosine_lr(cfg.lr, step, cfg.steps)
        for group in optimizer.param_groups:
            group["lr"] = lr
        optimizer.zero_grad()
        loss.backward()
        torch.nn.utils.clip_grad_norm_(params, cfg.grad_clip)
        optimizer.step()

        losses.append(float(loss))
        if log_fn and (step % cfg.log_every == 0 or step == cfg.steps - 1):
            log_fn(step, {"loss": float(loss), "ce": float(ce), "kl": float(kl), "lr": lr})
        if checkpoint_fn and (
            (step + 1) % cfg.checkpoint_every == 0 or step == cfg.steps - 1
        ):
            checkpoint_fn(step + 1, encoder, decoder, optimizer)

    encoder.eval()
    decoder.eval()
    return encoder, decoder, losses


def evaluate_reconstruction(
    meshes: list[CanonicalMesh],
    encoder: FaceTokenEncoder,
    decoder: FaceTokenDecoder,
) -> tuple[float, float]:
    """Mean (triangle accuracy, L2 distance) over a mesh set, mean-mode."""
    accs, l2s = [], []
    for cm in meshes:
        bins = reconstruct_bins(cm, encoder, decoder, mode="mean")
        acc, l2 = recon_metrics_from_bins(bins, cm.face_bins(), cm.resolution)
        accs.append(acc)
        l2s.append(l2)
    return float(np.mean(accs)), float(np.mean(l2s))
