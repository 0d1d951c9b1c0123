"""Sampling glue: noise -> Euler integration -> token decode -> mesh, plus
RePaint-style completion from a partial mesh and the toy condition encoder."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import Tensor

from ..autoencoder import (
    FaceTokenDecoder,
    FaceTokenEncoder,
    bins_to_canonical,
    decode_bins,
    encode,
)
from ..errors import GenerationFailure, ValidationError
from ..flow import CFGWeights, draw_noise, euler_sample, repaint_complete
from ..geometry import CanonicalMesh, Mesh, dequantize, sample_surface_points
from ..nn import padding_mask
from ..seeding import stream_seed
from .model import ConditionBundle, DiT


@dataclass
class ConditionBatch:
    """Per-sample condition bundles with batch-level null variants, so the
    guidance combiner can treat a batch like a single bundle."""

    bundles: list[ConditionBundle]

    def unconditional(self) -> "ConditionBatch":
        return ConditionBatch([b.unconditional() for b in self.bundles])

    def face_only(self) -> "ConditionBatch":
        return ConditionBatch([b.face_only() for b in self.bundles])


@dataclass
class GenerationResult:
    mesh: Mesh
    canonical: CanonicalMesh
    tokens: Tensor  # (n, C_KL)


@dataclass
class CompletionResult:
    mesh: Mesh
    canonical: CanonicalMesh
    tokens: Tensor        # (total, C_KL) pre-decode
    known_tokens: Tensor  # (p, C_KL) encoder output for the partial mesh
    known_mask: Tensor    # (total,) bool


def toy_condition_features(
    mesh: Mesh, dim: int = 32, n_points: int = 256, seed: int = 0
) -> Tensor:
    """Mean-pooled sinusoidal point features of a reference mesh: a stand-in
    condition encoder producing a length-1 feature sequence (1, dim)."""
    if dim < 1:
        raise ValidationError("feature dim must be positive")
    points = sample_surface_points(mesh, n_points, seed)
    n_freq = (dim + 5) // 6
    freqs = 2.0 ** np.arange(n_freq)
    args = points[:, None, :] * freqs[None, :, None]  # (P, F, 3)
    feats = np.concatenate(
        [np.sin(np.pi * args), np.cos(np.pi * args)], axis=2
    ).reshape(len(points), -1)[:, :dim]
    pooled = feats.mean(axis=0, dtype=np.float64)
    return torch.from_numpy(pooled.astype(np.float32))[None, :]


def _velocity_fn(dit: DiT, mask: Tensor | None = None):
    def fn(z, t, cond):
        conds = cond.bundles if isinstance(cond, ConditionBatch) else cond
        return dit(z, t, conds, mask)

    return fn


def _decode_clean(
    tokens: Tensor, decoder: FaceTokenDecoder, raw_tokens: Tensor
) -> tuple[Mesh, CanonicalMesh]:
    """Decode one (n, C) token sequence; reject degenerate/duplicate faces."""
    bins = decode_bins(tokens, decoder)
    cm = bins_to_canonical(bins, decoder.config.resolution)
    f = cm.faces
    degenerate = (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])
    if bool(degenerate.any()):
        raise GenerationFailure(
            f"{int(degenerate.sum())} degenerate faces in decoded mesh",
            tokens=raw_tokens,
        )
    if len(np.unique(f, axis=0)) != len(f):
        raise GenerationFailure("duplicate faces in decoded mesh", tokens=raw_tokens)
    return dequantize(cm), cm


def generate(
    dit: DiT,
    decoder: FaceTokenDecoder,
    face_count: int,
    cfg: CFGWeights | None = None,
    conditions: ConditionBundle | None = None,
    steps: int = 50,
    seed: int = 0,
    trace: list | None = None,
) -> GenerationResult:
    """Unconditional-noise to mesh with exactly ``face_count`` faces.

    The token sequence length sets the face count structurally; decoding
    failures (degenerate or duplicate faces) raise GenerationFailure with the
    raw tokens attached.
    """
    if cfg is None:
        cfg = CFGWeights.single()
    cond = conditions if conditions is not None else ConditionBundle(face_count=face_count)
    if cond.face_count != face_count:
        raise ValidationError("conditions.face_count must match the requested count")
    dit.face_index(face_count)  # range check against max_faces

    z0 = draw_noise((1, face_count, dit.cfg.latent_dim), seed)
    z1 = euler_sample(_velocity_fn(dit), z0, steps, cfg, cond, trace=trace)
    tokens = z1[0]
    mesh, cm = _decode_clean(tokens, decoder, tokens)
    return GenerationResult(mesh=mesh, canonical=cm, tokens=tokens)


def generate_batch(
    dit: DiT,
    decoder: FaceTokenDecoder,
    face_counts: list[int],
    cfg: CFGWeights | None = None,
    steps: int = 50,
    seed: int = 0,
) -> list[GenerationResult]:
    """Batched generation padding to the longest requested count. Per-sample
    noise comes from independent derived streams of ``seed``."""
    if cfg is None:
        cfg = CFGWeights.single()
    for n in face_counts:
        dit.face_index(n)
    b = len(face_counts)
    L = max(face_counts)
    c = dit.cfg.latent_dim
    z0 = torch.zeros(b, L, c)
    valid = torch.zeros(b, L, dtype=torch.bool)
    mask = padding_mask(face_counts, L)
    for i, n in enumerate(face_counts):
        z0[i, :n] = draw_noise((n, c), stream_seed(seed, f"sample-{i}"))
        valid[i, :n] = True

    conds = ConditionBatch([ConditionBundle(face_count=n) for n in face_counts])
    z1 = euler_sample(_velocity_fn(dit, mask), z0, steps, cfg, conds)

    results = []
    for i, n in enumerate(face_counts):
        tokens = z1[i, :n]
        mesh, cm = _decode_clean(tokens, decoder, tokens)
        results.append(GenerationResult(mesh=mesh, canonical=cm, tokens=tokens))
    return results


def complete(
    dit: DiT,
    encoder: FaceTokenEncoder,
    decoder: FaceTokenDecoder,
    partial: CanonicalMesh,
    total_faces: int,
    cfg: CFGWeights | None = None,
    steps: int = 50,
    seed: int = 0,
) -> CompletionResult:
    """Fill a mesh to ``total_faces`` given a partial observation.

    The partial faces are encoded to tokens, placed as the known prefix, and
    held on their noising path during sampling; they are reproduced bitwise in
    the pre-decode token sequence.
    """
    if partial.n >= total_faces:
        raise ValidationError(
            f"partial face count {partial.n} must be < total {total_faces}"
        )
    if cfg is None:
        cfg = CFGWeights.single()
    dit.face_index(total_faces)

    mu, _ = encode(partial, encoder)  # mean-mode tokens for the known faces
    c = dit.cfg.latent_dim
    known = torch.zeros(1, total_faces, c)
    known[0, : partial.n] = mu
    known_mask = torch.zeros(1, total_faces, dtype=torch.bool)
    known_mask[0, : partial.n] = True

    cond = ConditionBundle(face_count=total_faces)
    tokens = repaint_complete(
        _velocity_fn(dit), known, known_mask, steps, cfg, cond, seed=seed
    )[0]
    mesh, cm = _decode_clean(tokens, decoder, tokens)
    return CompletionResult(
        mesh=mesh,
        canonical=cm,
        tokens=tokens,
        known_tokens=mu,
        known_mask=known_mask[0],
    )
