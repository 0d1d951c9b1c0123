"""Variable-length diffusion transformer over face tokens.

Conditioning: timestep + face-count embeddings drive adaLN-Zero modulation;
optional condition-feature sequences enter through gated cross-attention.
Every modulated branch is gated by a zero-initialized projection and the
output head is zero-initialized, so a freshly initialized model predicts
exactly zero velocity for any input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
import torch.nn.functional as F
from torch import Tensor, nn

from ..errors import NumericError, ValidationError
from ..nn import (
    AdaLNModulation,
    CrossAttention,
    RMSNorm,
    SelfAttention,
    SwiGLU,
    init_projection,
    padding_mask,
    zero_init,
)


@dataclass
class DiTConfig:
    layers: int = 24
    hidden: int = 864
    heads: int = 8
    latent_dim: int = 8
    max_faces: int = 800
    use_cross_attention: bool = False
    cond_dim: int = 32          # width of condition feature vectors
    time_freq_dim: int = 128
    time_scale: float = 100.0   # t in [0,1] scaled before the sinusoid bank


@dataclass(frozen=True)
class ConditionBundle:
    """Face count (or None) plus optional condition feature sequence."""

    face_count: int | None = None
    features: Tensor | None = None  # (Lc, cond_dim)

    def unconditional(self) -> "ConditionBundle":
        return ConditionBundle(None, None)

    def face_only(self) -> "ConditionBundle":
        return ConditionBundle(self.face_count, None)


@dataclass
class PaddedBatch:
    """Fixed-length token batch: padding slots are exactly zero and the
    additive attention mask is NEG_INF exactly on padding columns."""

    tokens: Tensor       # (B, L, C)
    lengths: list[int]
    mask: Tensor         # (B, L) additive, {0, NEG_INF}
    valid: Tensor        # (B, L) bool

    def unpad(self) -> list[Tensor]:
        return [self.tokens[i, :n].clone() for i, n in enumerate(self.lengths)]


def pad_batch(sequences: list[Tensor]) -> PaddedBatch:
    """Zero-pad variable-length (n_i, C) token sequences to (B, L_max, C)."""
    if not sequences:
        raise ValidationError("pad_batch needs at least one sequence")
    lengths = [int(s.shape[0]) for s in sequences]
    if min(lengths) == 0:
        raise ValidationError("empty sequence in batch")
    L = max(lengths)
    C = sequences[0].shape[-1]
    dtype = sequences[0].dtype
    tokens = torch.zeros(len(sequences), L, C, dtype=dtype)
    for i, s in enumerate(sequences):
        if s.shape[-1] != C:
            raise ValidationError("inconsistent channel dims in batch")
        tokens[i, : lengths[i]] = s
    mask = padding_mask(lengths, L, dtype=dtype)
    valid = torch.arange(L)[None, :] < torch.as_tensor(lengths)[:, None]
    return PaddedBatch(tokens=tokens, lengths=lengths, mask=mask, valid=valid)


class TimestepEmbed(nn.Module):
    """Sinusoidal features of t (scaled) followed by a two-layer MLP."""

    def __init__(self, hidden: int, freq_dim: int = 128, scale: float = 100.0):
        super().__init__()
        if freq_dim % 2 != 0:
            raise ValidationError("freq_dim must be even")
        self.freq_dim = freq_dim
        self.scale = scale
        self.mlp = nn.Sequential(
            init_projection(nn.Linear(freq_dim, hidden)),
            nn.SiLU(),
            init_projection(nn.Linear(hidden, hidden)),
        )

    def forward(self, t: Tensor) -> Tensor:
        if t.dim() == 0:
            t = t[None]
        half = self.freq_dim // 2
        freqs = torch.exp(
            -math.log(10000.0)
            * torch.arange(half, dtype=t.dtype, device=t.device)
            / half
        )
        args = self.scale * t[:, None] * freqs[None, :]
        return self.mlp(torch.cat([torch.cos(args), torch.sin(args)], dim=-1))


def _modulate(x: Tensor, shift: Tensor, scale: Tensor) -> Tensor:
    return x * (1.0 + scale[:, None, :]) + shift[:, None, :]


class DiTBlock(nn.Module):
    """adaLN-modulated sandwich block: masked self-attention (RoPE + QK-norm),
    optional gated cross-attention, SwiGLU feed-forward."""

    def __init__(self, cfg: DiTConfig):
        super().__init__()
        self.use_cross = cfg.use_cross_attention
        self.adaln = AdaLNModulation(
            cfg.hidden, cfg.hidden, n_sublayers=3 if self.use_cross else 2
        )

        self.pre_attn = RMSNorm(cfg.hidden, affine=False)
        self.attn = SelfAttention(cfg.hidden, cfg.heads, use_rope=True, use_qk_norm=True)
        self.post_attn = RMSNorm(cfg.hidden)
        if self.use_cross:
            self.pre_cross = RMSNorm(cfg.hidden, affine=False)
            self.cross = CrossAttention(cfg.hidden, cfg.heads, cfg.cond_dim)
            self.post_cross = RMSNorm(cfg.hidden)
        self.pre_ffn = RMSNorm(cfg.hidden, affine=False)
        self.ffn = SwiGLU(cfg.hidden)
        self.post_ffn = RMSNorm(cfg.hidden)

    def forward(
        self,
        x: Tensor,
        cond: Tensor,
        mask: Tensor | None,
        context: Tensor | None,
    ) -> Tensor:
        mods = self.adaln(cond)

        shift, scale, gate = mods[0]
        h = _modulate(self.pre_attn(x), shift, scale)
        x = x + gate[:, None, :] * self.post_attn(self.attn(h, mask))

        if self.use_cross:
            shift, scale, gate = mods[1]
            h = _modulate(self.pre_cross(x), shift, scale)
            x = x + gate[:, None, :] * self.post_cross(self.cross(h, context))

        shift, scale, gate = mods[-1]
        h = _modulate(self.pre_ffn(x), shift, scale)
        return x + gate[:, None, :] * self.post_ffn(self.ffn(h))


class DiT(nn.Module):
    def __init__(self, cfg: DiTConfig):
        super().__init__()
        self.cfg = cfg
        self.null_face_index = cfg.max_faces + 1
        self.token_embed = init_projection(nn.Linear(cfg.latent_dim, cfg.hidden))
        self.time_embed = TimestepEmbed(cfg.hidden, cfg.time_freq_dim, cfg.time_scale)
        self.face_embed = nn.Embedding(cfg.max_faces + 2, cfg.hidden)
        nn.init.trunc_normal_(self.face_embed.weight, std=0.02, a=-0.04, b=0.04)
        if cfg.use_cross_attention:
            self.null_context = nn.Parameter(torch.zeros(1, cfg.cond_dim))
            nn.init.trunc_normal_(self.null_context, std=0.02, a=-0.04, b=0.04)
        self.blocks = nn.ModuleList(DiTBlock(cfg) for _ in range(cfg.layers))
        self.final_norm = RMSNorm(cfg.hidden, affine=False)
        self.final_adaln = zero_init(nn.Linear(cfg.hidden, 2 * cfg.hidden))
        self.head = zero_init(nn.Linear(cfg.hidden, cfg.latent_dim))

    def face_index(self, face_count: int | None) -> int:
        if face_count is None:
            return self.null_face_index
        if not 1 <= face_count <= self.cfg.max_faces:
            raise ValidationError(
                f"face count {face_count} outside [1, {self.cfg.max_faces}]"
            )
        return face_count

    def embed_face_count(self, face_count: int | None) -> Tensor:
        """Table lookup for one count (None selects the stable null row)."""
        idx = torch.tensor([self.face_index(face_count)])
        return self.face_embed(idx)[0]

    def embed_conditions(self, conds: list[ConditionBundle], dtype, device):
        """Returns (face-count embedding (B, hidden), context (B, Lc, cond_dim)
        or None). Null features map to the learned null context token."""
        idx = torch.tensor(
            [self.face_index(c.face_count) for c in conds], device=device
        )
        face_vec = self.face_embed(idx).to(dtype)
        context = None
        if self.cfg.use_cross_attention:
            feats = [c.features for c in conds]
            lc = max((f.shape[0] for f in feats if f is not None), default=1)
            context = (
                self.null_context.to(dtype).expand(lc, -1).unsqueeze(0)
                .repeat(len(conds), 1, 1)
            )
            for i, f in enumerate(feats):
                if f is not None:
                    if f.shape[0] != lc:
                        raise ValidationError(
                            "condition feature sequences in a batch must share length"
                        )
                    context[i] = f.to(dtype)
        return face_vec, context

    def forward(
        self,
        tokens: Tensor,
        t: Tensor,
        conds: list[ConditionBundle] | ConditionBundle | None,
        mask: Tensor | None = None,
    ) -> Tensor:
        """tokens (B, L, C_KL), t scalar or (B,) in [0, 1] -> velocity (B, L, C_KL)."""
        b = tokens.shape[0]
        if conds is None:
            conds = [ConditionBundle()] * b
        elif isinstance(conds, ConditionBundle):
            conds = [conds] * b
        if len(conds) != b:
            raise ValidationError(f"need {b} condition bundles, got {len(conds)}")
        t = torch.as_tensor(t, dtype=tokens.dtype, device=tokens.device)
        if t.dim() == 0:
            t = t.expand(b)

        face_vec, context = self.embed_conditions(conds, tokens.dtype, tokens.device)
        cond = self.time_embed(t) + face_vec

        x = self.token_embed(tokens)
        for block in self.blocks:
            x = block(x, cond, mask, context)

        shift, scale = self.final_adaln(F.silu(cond)).chunk(2, dim=-1)
        x = _modulate(self.final_norm(x), shift, scale)
        out = self.head(x)
        if not torch.isfinite(out).all():
            raise NumericError("non-finite velocity prediction")
        return out
