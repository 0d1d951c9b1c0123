"""Rectified-flow mathematics: straight-line interpolant, velocity regression
targets, logit-normal time sampling, guidance combination, Euler sampling, and
inpainting-style completion.

Convention: t = 0 is the noise endpoint, t = 1 is the data endpoint; sampling
integrates a learned velocity field left to right on a uniform grid.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import torch
from torch import Tensor

from .errors import NumericError, ValidationError
from .seeding import torch_generator


@dataclass
class TimeSampler:
    """Logit-normal time distribution: t = sigmoid(m + s * eps)."""

    m: float = 0.5
    s: float = 1.0

    def __post_init__(self):
        if self.s <= 0:
            raise ValidationError(f"scale must be positive, got {self.s}")


@dataclass(frozen=True)
class CFGWeights:
    """Guidance weights: single-condition w, or dual-condition (w1, w2)."""

    w: float | None = None
    w1: float | None = None
    w2: float | None = None

    def __post_init__(self):
        dual = (self.w1 is not None) or (self.w2 is not None)
        if self.w is not None and dual:
            raise ValidationError("set either w or (w1, w2), not both")
        if dual and (self.w1 is None or self.w2 is None):
            raise ValidationError("dual guidance needs both w1 and w2")
        for value in (self.w, self.w1, self.w2):
            if value is not None and not math.isfinite(value):
                raise ValidationError("guidance weights must be finite")

    @classmethod
    def none(cls) -> "CFGWeights":
        return cls()

    @classmethod
    def single(cls, w: float = 8.0) -> "CFGWeights":
        return cls(w=w)

    @classmethod
    def dual(cls, w1: float = 1.0, w2: float = 5.0) -> "CFGWeights":
        return cls(w1=w1, w2=w2)

    @property
    def n_branches(self) -> int:
        if self.w is not None:
            return 2
        if self.w1 is not None:
            return 3
        return 1


def interpolant(x0: Tensor, x1: Tensor, t: float | Tensor) -> Tensor:
    """t x1 + (1 - t) x0: t=0 gives the noise endpoint, t=1 the data."""
    t_val = torch.as_tensor(t, dtype=x0.dtype, device=x0.device)
    if bool((t_val < 0).any()) or bool((t_val > 1).any()):
        raise ValidationError(f"t must lie in [0, 1], got {t!r}")
    if x0.shape != x1.shape:
        raise ValidationError(f"shape mismatch {tuple(x0.shape)} vs {tuple(x1.shape)}")
    while t_val.dim() < x0.dim() and t_val.dim() > 0:
        t_val = t_val.unsqueeze(-1)
    return t_val * x1 + (1.0 - t_val) * x0


def velocity_target(x0: Tensor, x1: Tensor) -> Tensor:
    """The constant straight-path velocity x1 - x0."""
    if x0.shape != x1.shape:
        raise ValidationError(f"shape mismatch {tuple(x0.shape)} vs {tuple(x1.shape)}")
    return x1 - x0


def logit_normal_density(t: float, m: float = 0.5, s: float = 1.0) -> float:
    """Density of sigmoid(m + s * eps) at t in (0, 1)."""
    if not 0.0 < t < 1.0:
        raise ValidationError(f"density defined on (0, 1), got t={t}")
    logit = math.log(t / (1.0 - t))
    return (
        1.0
        / (s * math.sqrt(2.0 * math.pi) * t * (1.0 - t))
        * math.exp(-((logit - m) ** 2) / (2.0 * s * s))
    )


def sample_time(
    sampler: TimeSampler, seed: int, n: int = 1, step: int | None = None
) -> Tensor:
    """Draw n logit-normal times, deterministic under (seed, step)."""
    gen = torch_generator(seed, "time", step)
    eps = torch.randn(n, generator=gen, dtype=torch.float64)
    return torch.sigmoid(sampler.m + sampler.s * eps)


def flow_loss(v_pred: Tensor, v_target: Tensor, valid_mask: Tensor | None = None) -> Tensor:
    """MSE over valid token-channel slots only; padded slots are excluded."""
    if v_pred.shape != v_target.shape:
        raise ValidationError(
            f"shape mismatch {tuple(v_pred.shape)} vs {tuple(v_target.shape)}"
        )
    sq = (v_pred - v_target) ** 2
    if valid_mask is None:
        return sq.mean()
    valid = valid_mask.to(dtype=torch.bool)
    while valid.dim() < sq.dim():
        valid = valid.unsqueeze(-1)
    valid = valid.expand_as(sq)
    n_valid = int(valid.sum())
    if n_valid == 0:
        raise ValidationError("flow_loss over zero valid slots")
    return sq[valid].sum() / n_valid


def cfg_single(v_uncond: Tensor, v_cond: Tensor, w: float) -> Tensor:
    """v_uncond + w * (v_cond - v_uncond)."""
    if v_uncond.shape != v_cond.shape:
        raise ValidationError("guidance branch shapes differ")
    return v_uncond + w * (v_cond - v_uncond)


def cfg_dual(
    v_null_null: Tensor, v_f_null: Tensor, v_f_i: Tensor, w1: float, w2: float
) -> Tensor:
    """Three-term guidance for (face count, feature) conditions:
    v(0,0) + w1 (v(f,0) - v(0,0)) + w2 (v(f,i) - v(f,0))."""
    if not (v_null_null.shape == v_f_null.shape == v_f_i.shape):
        raise ValidationError("guidance branch shapes differ")
    return v_null_null + w1 * (v_f_null - v_null_null) + w2 * (v_f_i - v_f_null)


def _guided_velocity(velocity_fn, z, t, cfg: CFGWeights, conditions):
    """Evaluate 1, 2, or 3 branches and combine per the guidance weights.

    ``conditions`` may be None (unconditional model) or any bundle object with
    ``unconditional()`` and ``face_only()`` variants (see dit.ConditionBundle).
    """
    if cfg is None or cfg.n_branches == 1 or conditions is None:
        return velocity_fn(z, t, conditions)
    if cfg.n_branches == 2:
        v_uncond = velocity_fn(z, t, conditions.unconditional())
        v_cond = velocity_fn(z, t, conditions)
        return cfg_single(v_uncond, v_cond, cfg.w)
    v_null_null = velocity_fn(z, t, conditions.unconditional())
    v_f_null = velocity_fn(z, t, conditions.face_only())
    v_f_i = velocity_fn(z, t, conditions)
    return cfg_dual(v_null_null, v_f_null, v_f_i, cfg.w1, cfg.w2)


def euler_sample(
    velocity_fn: Callable,
    z0: Tensor,
    steps: int,
    cfg: CFGWeights | None = None,
    conditions=None,
    trace: list | None = None,
) -> Tensor:
    """Left-endpoint Euler integration of dz/dt = v(z, t) from t=0 to t=1.

    t_k = k / steps; one guided velocity per step costs 1, 2, or 3
    ``velocity_fn`` evaluations depending on the guidance mode, independent of
    the sequence length. ``trace``, if given, collects (t, mean |v|) records.
    """
    if steps < 1:
        raise ValidationError(f"steps must be >= 1, got {steps}")
    z = z0
    dt = 1.0 / steps
    for k in range(steps):
        t = k / steps
        v = _guided_velocity(velocity_fn, z, t, cfg, conditions)
        z = z + dt * v
        if not bool(torch.isfinite(z).all()):
            raise NumericError(f"non-finite state at sampler step {k}")
        if trace is not None:
            trace.append((t, float(v.abs().mean())))
    return z


def draw_noise(shape, seed: int, dtype=torch.float32) -> Tensor:
    """Standard-normal z0 for the sampler, from the named noise stream."""
    gen = torch_generator(seed, "noise")
    return torch.randn(*shape, generator=gen, dtype=dtype)


def repaint_complete(
    velocity_fn: Callable,
    known_tokens: Tensor,
    known_mask: Tensor,
    steps: int,
    cfg: CFGWeights | None = None,
    conditions=None,
    seed: int = 0,
    z0: Tensor | None = None,
) -> Tensor:
    """Generate while holding known token positions on their noising path.

    After every Euler step at time t the known positions are overwritten with
    interpolant(z0_fixed, known_tokens, t), where z0_fixed is the single
    initial noise draw. At t=1 the known positions equal known_tokens exactly
    (bitwise); unknown positions are filled by the velocity field.
    """
    known_mask = known_mask.to(dtype=torch.bool)
    if known_mask.shape != known_tokens.shape[: known_mask.dim()]:
        raise ValidationError("known_mask must match the token layout")
    if z0 is None:
        z0 = draw_noise(known_tokens.shape, seed, dtype=known_tokens.dtype)
    if bool(known_mask.all()):
        warnings.warn("all positions known: returning known_tokens", stacklevel=2)
        return known_tokens.clone()

    mask = known_mask
    while mask.dim() < known_tokens.dim():
        mask = mask.unsqueeze(-1)
    mask = mask.expand_as(known_tokens)

    z = z0.clone()
    dt = 1.0 / steps
    for k in range(steps):
        t = k / steps
        v = _guided_velocity(velocity_fn, z, t, cfg, conditions)
        z = z + dt * v
        if not bool(torch.isfinite(z).all()):
            raise NumericError(f"non-finite state at completion step {k}")
        t_next = (k + 1) / steps
        z = torch.where(mask, interpolant(z0, known_tokens, t_next), z)
    # the final overwrite above is interpolant(.., 1.0); re-assert bitwise
    return torch.where(mask, known_tokens, z)
