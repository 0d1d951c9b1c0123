"""Central finite-difference verification of analytic gradients.

Analytic gradients come from autograd; the independent oracle is a central
finite difference evaluated element by element in double precision. Large
tensors are spot-checked on a seeded random subset of elements.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import torch
from torch import Tensor

from ..errors import NumericError
from ..seeding import rng as _stream_rng


@dataclass
class ParamCheck:
    name: str
    max_rel_err: float
    n_checked: int


@dataclass
class GradCheckReport:
    checks: list[ParamCheck]

    @property
    def max_rel_err(self) -> float:
        return max((c.max_rel_err for c in self.checks), default=0.0)

    def passed(self, threshold: float = 1e-4) -> bool:
        return self.max_rel_err <= threshold

    def failures(self, threshold: float = 1e-4) -> list[ParamCheck]:
        return [c for c in self.checks if c.max_rel_err > threshold]

    def format(self, threshold: float = 1e-4) -> str:
        lines = []
        for c in sorted(self.checks, key=lambda c: -c.max_rel_err):
            status = "ok  " if c.max_rel_err <= threshold else "FAIL"
            lines.append(
                f"{status} {c.name:<48s} rel_err={c.max_rel_err:.3e} ({c.n_checked} elems)"
            )
        return "\n".join(lines)


def grad_check(
    fn: Callable[[], Tensor],
    params: dict[str, Tensor],
    eps: float = 1e-5,
    max_elements: int = 6,
    seed: int = 0,
) -> GradCheckReport:
    """Compare autograd gradients of the scalar ``fn()`` against central
    finite differences for every tensor in ``params``.

    ``fn`` must be pure and deterministic (closures over ``params``). Tensors
    with more than ``max_elements`` entries are checked on a seeded random
    subset. Relative error uses |a - f| / max(|a|, |f|, 1e-4) so vanishing
    gradients are compared on an absolute floor.
    """
    names = list(params)
    tensors = [params[n] for n in names]
    for n, p in zip(names, tensors):
        if not p.requires_grad:
            raise ValueError(f"parameter {n} does not require grad")

    loss = fn()
    if not torch.isfinite(loss):
        raise NumericError(f"non-finite loss {loss.item()!r} in grad_check")
    grads = torch.autograd.grad(loss, tensors, allow_unused=True)

    gen = _stream_rng(seed, "grad-check")
    checks = []
    for name, param, grad in zip(names, tensors, grads):
        flat = param.data.view(-1)
        n = flat.numel()
        if n == 0:
            continue
        if n <= max_elements:
            idx = np.arange(n)
        else:
            idx = gen.choice(n, size=max_elements, replace=False)
        grad_flat = (
            torch.zeros_like(flat) if grad is None else grad.reshape(-1)
        )
        worst = 0.0
        for i in idx:
            i = int(i)
            orig = flat[i].item()
            with torch.no_grad():
                flat[i] = orig + eps
                f_plus = fn().item()
                flat[i] = orig - eps
                f_minus = fn().item()
                flat[i] = orig
            if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
                raise NumericError(f"non-finite perturbed loss for {name}[{i}]")
            fd = (f_plus - f_minus) / (2.0 * eps)
            analytic = grad_flat[i].item()
            rel = abs(analytic - fd) / max(abs(analytic), abs(fd), 1e-4)
            worst = max(worst, rel)
        checks.append(ParamCheck(name=name, max_rel_err=worst, n_checked=len(idx)))
    return GradCheckReport(checks)


def module_grad_check(
    module: torch.nn.Module,
    loss_fn: Callable[[torch.nn.Module], Tensor],
    eps: float = 1e-5,
    max_elements: int = 6,
    seed: int = 0,
) -> GradCheckReport:
    """grad_check over every named parameter of a module (run it in float64)."""
    params = dict(module.named_parameters())
    return grad_check(
        lambda: loss_fn(module), params, eps=eps, max_elements=max_elements, seed=seed
    )
