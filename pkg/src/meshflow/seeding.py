"""Named random streams derived from a single root seed.

Every source of randomness in the pipeline draws from a stream identified by
(root seed, purpose name, optional step index). Streams are independent and
stable across platforms (SHA-256 based, not Python ``hash``), so any stage can
be re-run in isolation and training can resume mid-run with identical draws.
"""

from __future__ import annotations

import hashlib

import numpy as np
import torch


def stream_seed(root: int, name: str, step: int | None = None) -> int:
    """63-bit seed for the stream (root, name, step)."""
    tag = f"{root}:{name}" if step is None else f"{root}:{name}:{step}"
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") & 0x7FFF_FFFF_FFFF_FFFF


def rng(root: int, name: str, step: int | None = None) -> np.random.Generator:
    return np.random.default_rng(stream_seed(root, name, step))


def torch_generator(root: int, name: str, step: int | None = None) -> torch.Generator:
    gen = torch.Generator()
    gen.manual_seed(stream_seed(root, name, step))
    return gen
