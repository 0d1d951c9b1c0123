"""Normalization, SwiGLU feed-forward, sandwich residual, adaLN modulation."""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import Tensor, nn


def init_projection(module: nn.Linear, std: float = 0.02) -> nn.Linear:
    """Truncated-normal weight (std 0.02), zero bias."""
    nn.init.trunc_normal_(module.weight, std=std, a=-2 * std, b=2 * std)
    if module.bias is not None:
        nn.init.zeros_(module.bias)
    return module


def zero_init(module: nn.Linear) -> nn.Linear:
    nn.init.zeros_(module.weight)
    if module.bias is not None:
        nn.init.zeros_(module.bias)
    return module


class RMSNorm(nn.Module):
    def __init__(self, dim: int, affine: bool = True, eps: float = 1e-6):
        super().__init__()
        self.eps = eps
        self.weight = nn.Parameter(torch.ones(dim)) if affine else None

    def forward(self, x: Tensor) -> Tensor:
        y = x * torch.rsqrt(x.pow(2).mean(dim=-1, keepdim=True) + self.eps)
        return y * self.weight if self.weight is not None else y


def swiglu_hidden_dim(dim: int) -> int:
    """round(8 d / 3) to the nearest multiple of 8."""
    return 8 * max(1, round(8 * dim / 3 / 8))


class SwiGLU(nn.Module):
    """down(silu(gate(x)) * up(x)) with no biases."""

    def __init__(self, dim: int, hidden: int | None = None):
        super().__init__()
        hidden = hidden or swiglu_hidden_dim(dim)
        self.gate = init_projection(nn.Linear(dim, hidden, bias=False))
        self.up = init_projection(nn.Linear(dim, hidden, bias=False))
        self.down = init_projection(nn.Linear(hidden, dim, bias=False))

    def forward(self, x: Tensor) -> Tensor:
        return self.down(F.silu(self.gate(x)) * self.up(x))


class SandwichResidual(nn.Module):
    """x + post_norm(sublayer(pre_norm(x))): normalization on both sides of
    the sublayer, inside the residual branch."""

    def __init__(self, dim: int, sublayer: nn.Module):
        super().__init__()
        self.pre = RMSNorm(dim)
        self.sublayer = sublayer
        self.post = RMSNorm(dim)

    def forward(self, x: Tensor, *args, **kwargs) -> Tensor:
        return x + self.post(self.sublayer(self.pre(x), *args, **kwargs))


class AdaLNModulation(nn.Module):
    """Conditioning vector -> (shift, scale, gate) per sublayer.

    The projection is zero-initialized, so every gate starts at exactly zero
    and modulated blocks contribute nothing at initialization.
    """

    def __init__(self, cond_dim: int, dim: int, n_sublayers: int):
        super().__init__()
        self.n_sublayers = n_sublayers
        self.proj = zero_init(nn.Linear(cond_dim, 3 * n_sublayers * dim))

    def forward(self, cond: Tensor) -> tuple[tuple[Tensor, Tensor, Tensor], ...]:
        chunks = self.proj(F.silu(cond)).chunk(3 * self.n_sublayers, dim=-1)
        return tuple(
            (chunks[3 * i], chunks[3 * i + 1], chunks[3 * i + 2])
            for i in range(self.n_sublayers)
        )


def modulate(x: Tensor, shift: Tensor, scale: Tensor) -> Tensor:
    """x * (1 + scale) + shift with per-sample vectors broadcast over tokens."""
    return x * (1.0 + scale[:, None, :]) + shift[:, None, :]
