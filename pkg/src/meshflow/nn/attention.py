"""Masked scaled-dot-product attention with rotary positions and QK-norm.

The additive attention mask uses 0 for valid key positions and NEG_INF
(-1e9, finite to keep softmax NaN-free) for padding. Padded keys end up with
weight < 1e-12 after softmax; queries whose keys are all masked produce zeros.
"""

from __future__ import annotations

import math
import warnings

import torch
import torch.nn.functional as F
from torch import Tensor, nn

from ..errors import ValidationError

NEG_INF = -1.0e9


def padding_mask(lengths: list[int] | Tensor, max_len: int, dtype=torch.float32) -> Tensor:
    """(B, max_len) additive mask: 0 on valid columns, NEG_INF on padding."""
    lengths = torch.as_tensor(lengths, dtype=torch.long)
    idx = torch.arange(max_len)
    mask = torch.zeros(len(lengths), max_len, dtype=dtype)
    mask[idx[None, :] >= lengths[:, None]] = NEG_INF
    return mask


def rope_rotate(x: Tensor, positions: Tensor | list[int], base: float = 10000.0) -> Tensor:
    """Rotary position embedding over the last dimension (must be even).

    Pairs (x_i, x_{i+d/2}) are rotated by angle pos * base^(-2i/d); rotations
    preserve the per-position norm, and dot products of rotated query/key
    pairs depend only on the position difference.
    """
    d = x.shape[-1]
    if d % 2 != 0:
        raise ValidationError(f"rope needs an even head dimension, got {d}")
    positions = torch.as_tensor(positions, dtype=x.dtype, device=x.device)
    if positions.shape[-1] != x.shape[-2]:
        raise ValidationError(
            f"positions length {positions.shape[-1]} != sequence length {x.shape[-2]}"
        )
    half = d // 2
    inv_freq = base ** (
        -torch.arange(0, half, dtype=x.dtype, device=x.device) * 2.0 / d
    )
    angles = positions[..., :, None] * inv_freq  # (..., L, d/2)
    cos, sin = torch.cos(angles), torch.sin(angles)
    x1, x2 = x[..., :half], x[..., half:]
    return torch.cat([x1 * cos - x2 * sin, x2 * cos + x1 * sin], dim=-1)


def masked_attention(
    q: Tensor,
    k: Tensor,
    v: Tensor,
    mask: Tensor | None = None,
    positions: Tensor | list[int] | None = None,
    *,
    use_rope: bool = False,
    use_qk_norm: bool = False,
    rope_base: float = 10000.0,
) -> Tensor:
    """softmax(QK^T / sqrt(d) + M) V over the last two dimensions.

    q: (..., Lq, d); k, v: (..., Lk, d); mask broadcastable to (..., Lq, Lk).
    With use_qk_norm, scores use LayerNorm(q) . LayerNorm(k)^T / sqrt(d),
    which bounds |score| by sqrt(d). With use_rope, q and k are rotated at
    ``positions`` (self-attention layout: same positions for both).
    """
    d = q.shape[-1]
    if k.shape[-1] != d:
        raise ValidationError(f"q/k head dims differ: {d} vs {k.shape[-1]}")
    if v.shape[-2] != k.shape[-2]:
        raise ValidationError(
            f"k/v sequence lengths differ: {k.shape[-2]} vs {v.shape[-2]}"
        )
    if use_qk_norm:
        q = F.layer_norm(q, (d,))
        k = F.layer_norm(k, (d,))
    if use_rope:
        if positions is None:
            positions = torch.arange(q.shape[-2], device=q.device)
        q = rope_rotate(q, positions, rope_base)
        k = rope_rotate(k, positions, rope_base)

    scores = q @ k.transpose(-1, -2) / math.sqrt(d)
    if mask is not None:
        try:
            mask = torch.broadcast_to(mask, scores.shape)
        except RuntimeError:
            raise ValidationError(
                f"mask shape {tuple(mask.shape)} does not broadcast to "
                f"score shape {tuple(scores.shape)}"
            ) from None
        scores = scores + mask

    weights = torch.softmax(scores, dim=-1)
    out = weights @ v

    if mask is not None:
        dead = (mask <= NEG_INF / 2).all(dim=-1)
        if bool(dead.any()):
            warnings.warn("query rows with all keys masked produce zeros", stacklevel=2)
            out = out.masked_fill(dead[..., None], 0.0)
    return out


class SelfAttention(nn.Module):
    """Multi-head self-attention over (B, L, dim) with optional RoPE/QK-norm."""

    def __init__(self, dim: int, heads: int, use_rope: bool = True,
                 use_qk_norm: bool = True, rope_base: float = 10000.0):
        super().__init__()
        if dim % heads != 0:
            raise ValidationError(f"dim {dim} not divisible by heads {heads}")
        self.heads = heads
        self.head_dim = dim // heads
        if use_rope and self.head_dim % 2 != 0:
            raise ValidationError(f"rope needs an even head dim, got {self.head_dim}")
        self.use_rope = use_rope
        self.use_qk_norm = use_qk_norm
        self.rope_base = rope_base
        self.qkv = nn.Linear(dim, 3 * dim)
        self.out = nn.Linear(dim, dim)

    def forward(self, x: Tensor, mask: Tensor | None = None) -> Tensor:
        b, l, dim = x.shape
        qkv = self.qkv(x).view(b, l, 3, self.heads, self.head_dim)
        q, k, v = (qkv[:, :, i].transpose(1, 2) for i in range(3))  # (B, H, L, dh)
        if mask is not None:
            mask = mask[:, None, None, :]  # broadcast over heads and queries
        y = masked_attention(
            q, k, v, mask,
            use_rope=self.use_rope, use_qk_norm=self.use_qk_norm,
            rope_base=self.rope_base,
        )
        return self.out(y.transpose(1, 2).reshape(b, l, dim))


class CrossAttention(nn.Module):
    """Multi-head cross-attention from tokens to a context sequence."""

    def __init__(self, dim: int, heads: int, context_dim: int | None = None):
        super().__init__()
        if dim % heads != 0:
            raise ValidationError(f"dim {dim} not divisible by heads {heads}")
        self.heads = heads
        self.head_dim = dim // heads
        context_dim = context_dim or dim
        self.to_q = nn.Linear(dim, dim)
        self.to_kv = nn.Linear(context_dim, 2 * dim)
        self.out = nn.Linear(dim, dim)

    def forward(self, x: Tensor, context: Tensor) -> Tensor:
        b, l, dim = x.shape
        lc = context.shape[1]
        q = self.to_q(x).view(b, l, self.heads, self.head_dim).transpose(1, 2)
        kv = self.to_kv(context).view(b, lc, 2, self.heads, self.head_dim)
        k, v = kv[:, :, 0].transpose(1, 2), kv[:, :, 1].transpose(1, 2)
        y = masked_attention(q, k, v, use_qk_norm=True)
        return self.out(y.transpose(1, 2).reshape(b, l, dim))
