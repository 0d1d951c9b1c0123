"""Binary checkpoint format: magic + version header, config snapshot, named
float32 parameter segments with per-segment CRC32, training-step counter.

save -> load round-trips parameters bitwise; version or CRC mismatches are
rejected with a message.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .errors import ValidationError

MAGIC = b"MSHF"
VERSION = 1


@dataclass
class Checkpoint:
    step: int
    config: dict[str, str]
    segments: dict[str, np.ndarray] = field(default_factory=dict)

    def tensor(self, name: str) -> torch.Tensor:
        return torch.from_numpy(self.segments[name].copy())


def _config_bytes(config: dict[str, str]) -> bytes:
    lines = [f"{k} = {config[k]}" for k in sorted(config)]
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


def _parse_config(blob: bytes) -> dict[str, str]:
    out = {}
    for line in blob.decode("utf-8").splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition(" = ")
        out[key] = value
    return out


def save_checkpoint(
    path: str | Path,
    step: int,
    config: dict[str, str],
    segments: dict[str, np.ndarray | torch.Tensor],
) -> None:
    chunks = [MAGIC, struct.pack("<IQ", VERSION, step)]
    cfg = _config_bytes(config)
    chunks.append(struct.pack("<I", len(cfg)))
    chunks.append(cfg)
    chunks.append(struct.pack("<I", len(segments)))
    for name in segments:  # preserve insertion order: deterministic bytes
        arr = segments[name]
        if isinstance(arr, torch.Tensor):
            arr = arr.detach().cpu().numpy()
        arr = np.ascontiguousarray(arr, dtype="<f4")
        name_b = name.encode("utf-8")
        raw = arr.tobytes()
        chunks.append(struct.pack("<I", len(name_b)))
        chunks.append(name_b)
        chunks.append(struct.pack("<I", arr.ndim))
        chunks.append(struct.pack(f"<{max(arr.ndim, 0)}Q", *arr.shape))
        chunks.append(struct.pack("<Q", len(raw)))
        chunks.append(raw)
        chunks.append(struct.pack("<I", zlib.crc32(raw) & 0xFFFFFFFF))
    Path(path).write_bytes(b"".join(chunks))


def load_checkpoint(path: str | Path) -> Checkpoint:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise ValidationError(f"not a meshflow checkpoint: {path}")
    version, step = struct.unpack_from("<IQ", data, 4)
    if version != VERSION:
        raise ValidationError(
            f"checkpoint version {version} unsupported (expected {VERSION})"
        )
    offset = 16
    (cfg_len,) = struct.unpack_from("<I", data, offset)
    offset += 4
    config = _parse_config(data[offset : offset + cfg_len])
    offset += cfg_len
    (n_segments,) = struct.unpack_from("<I", data, offset)
    offset += 4

    segments: dict[str, np.ndarray] = {}
    for _ in range(n_segments):
        (name_len,) = struct.unpack_from("<I", data, offset)
        offset += 4
        name = data[offset : offset + name_len].decode("utf-8")
        offset += name_len
        (ndim,) = struct.unpack_from("<I", data, offset)
        offset += 4
        shape = struct.unpack_from(f"<{ndim}Q", data, offset)
        offset += 8 * ndim
        (nbytes,) = struct.unpack_from("<Q", data, offset)
        offset += 8
        raw = data[offset : offset + nbytes]
        offset += nbytes
        (crc,) = struct.unpack_from("<I", data, offset)
        offset += 4
        if zlib.crc32(raw) & 0xFFFFFFFF != crc:
            raise ValidationError(f"CRC mismatch in segment {name!r}")
        segments[name] = np.frombuffer(raw, dtype="<f4").reshape(shape).copy()
    return Checkpoint(step=step, config=config, segments=segments)


def module_segments(prefix: str, module: torch.nn.Module) -> dict[str, np.ndarray]:
    return {
        f"{prefix}.{name}": p.detach().cpu().numpy()
        for name, p in module.state_dict().items()
    }


def load_module_segments(prefix: str, module: torch.nn.Module, ckpt: Checkpoint) -> None:
    state = {}
    skip = len(prefix) + 1
    for name, arr in ckpt.segments.items():
        if name.startswith(prefix + "."):
            state[name[skip:]] = torch.from_numpy(arr.copy())
    missing = set(module.state_dict()) - set(state)
    if missing:
        raise ValidationError(f"checkpoint missing segments for {sorted(missing)[:4]}")
    module.load_state_dict(state)


def optimizer_segments(prefix: str, optimizer: torch.optim.Optimizer) -> dict[str, np.ndarray]:
    """Flatten AdamW state (step, exp_avg, exp_avg_sq per parameter index)."""
    out = {}
    for idx, state in optimizer.state_dict()["state"].items():
        for key, value in state.items():
            tensor = value if isinstance(value, torch.Tensor) else torch.tensor(float(value))
            out[f"{prefix}.{idx}.{key}"] = tensor.detach().cpu().to(torch.float32).numpy()
    return out


def load_optimizer_segments(
    prefix: str, optimizer: torch.optim.Optimizer, ckpt: Checkpoint
) -> None:
    sd = optimizer.state_dict()
    state: dict[int, dict] = {}
    skip = len(prefix) + 1
    for name, arr in ckpt.segments.items():
        if not name.startswith(prefix + "."):
            continue
        idx_s, key = name[skip:].split(".", 1)
        state.setdefault(int(idx_s), {})[key] = torch.from_numpy(arr.copy())
    sd["state"] = state
    optimizer.load_state_dict(sd)
