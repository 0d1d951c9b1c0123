"""On-disk dataset formats: the mesh manifest and the latent token dataset.

Manifest: one line per mesh, tab-separated ``path<TAB>n_faces<TAB>split``.
Latent dataset: little-endian binary with per-mesh (mu, logvar) float32
arrays and the face count, consumed by the diffusion trainer.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError

LATENT_MAGIC = b"MFLT"
LATENT_VERSION = 1


@dataclass
class ManifestRecord:
    path: str
    n_faces: int
    split: str  # "train" or "val"


def write_manifest(records: list[ManifestRecord], path: str | Path) -> None:
    lines = [f"{r.path}\t{r.n_faces}\t{r.split}" for r in records]
    Path(path).write_text("\n".join(lines) + "\n" if lines else "", encoding="utf-8")


def read_manifest(path: str | Path) -> list[ManifestRecord]:
    records = []
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValidationError(f"manifest line {lineno}: expected 3 fields")
        if parts[2] not in ("train", "val"):
            raise ValidationError(f"manifest line {lineno}: bad split {parts[2]!r}")
        records.append(ManifestRecord(parts[0], int(parts[1]), parts[2]))
    return records


@dataclass
class LatentRecord:
    mu: np.ndarray       # (n, C_KL) float32
    logvar: np.ndarray   # (n, C_KL) float32
    face_count: int

    @property
    def n(self) -> int:
        return len(self.mu)


def write_latent_dataset(
    records: list[LatentRecord], latent_dim: int, path: str | Path
) -> None:
    chunks = [LATENT_MAGIC, struct.pack("<III", LATENT_VERSION, len(records), latent_dim)]
    for r in records:
        mu = np.ascontiguousarray(r.mu, dtype="<f4")
        logvar = np.ascontiguousarray(r.logvar, dtype="<f4")
        if mu.shape != (r.n, latent_dim) or logvar.shape != mu.shape:
            raise ValidationError("latent record shape mismatch")
        chunks.append(struct.pack("<II", r.n, r.face_count))
        chunks.append(mu.tobytes())
        chunks.append(logvar.tobytes())
    Path(path).write_bytes(b"".join(chunks))


def read_latent_dataset(path: str | Path) -> tuple[list[LatentRecord], int]:
    data = Path(path).read_bytes()
    if data[:4] != LATENT_MAGIC:
        raise ValidationError(f"not a latent dataset: {path}")
    version, n_meshes, latent_dim = struct.unpack_from("<III", data, 4)
    if version != LATENT_VERSION:
        raise ValidationError(
            f"latent dataset version {version} unsupported (expected {LATENT_VERSION})"
        )
    offset = 16
    records = []
    for _ in range(n_meshes):
        n, face_count = struct.unpack_from("<II", data, offset)
        offset += 8
        nbytes = n * latent_dim * 4
        mu = np.frombuffer(data, dtype="<f4", count=n * latent_dim, offset=offset)
        offset += nbytes
        logvar = np.frombuffer(data, dtype="<f4", count=n * latent_dim, offset=offset)
        offset += nbytes
        records.append(
            LatentRecord(
                mu=mu.reshape(n, latent_dim).copy(),
                logvar=logvar.reshape(n, latent_dim).copy(),
                face_count=face_count,
            )
        )
    return records, latent_dim
