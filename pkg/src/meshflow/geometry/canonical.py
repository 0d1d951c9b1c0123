"""Canonical mesh sequencing: quantization, deduplication, deterministic order.

The canonical form is unique for a given surface at a given resolution:
vertices are quantized to integer bins, merged, and sorted by (z, y, x);
each face triple is cyclically rotated so its lowest index comes first
(winding preserved, never mirrored), then faces are sorted lexicographically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputError, ValidationError
from .mesh import Mesh


@dataclass
class CanonicalMesh:
    """Quantized, deduplicated, deterministically ordered triangle mesh."""

    resolution: int
    vertices: np.ndarray  # (n_verts, 3) int64 bins in [0, resolution), stored (x, y, z)
    faces: np.ndarray     # (n, 3) int64, ordering per canonical rules

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.int64).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)

    @property
    def n(self) -> int:
        return len(self.faces)

    def face_bins(self) -> np.ndarray:
        """Per-face quantized coordinates, shape (n, 9): x1 y1 z1 x2 y2 z2 x3 y3 z3."""
        return self.vertices[self.faces].reshape(-1, 9)


def quantize_coords(coords: np.ndarray, resolution: int) -> np.ndarray:
    """Bin b = clamp(floor((c + 1) / 2 * resolution), 0, resolution - 1)."""
    bins = np.floor((coords + 1.0) / 2.0 * resolution).astype(np.int64)
    return np.clip(bins, 0, resolution - 1)


def dequantize_bins(bins: np.ndarray, resolution: int) -> np.ndarray:
    """Bin midpoint: (b + 0.5) / resolution * 2 - 1."""
    return (np.asarray(bins, dtype=np.float64) + 0.5) / resolution * 2.0 - 1.0


def _rotate_lowest_first(faces: np.ndarray) -> np.ndarray:
    """Cyclically rotate each triple so the lowest index is first."""
    shift = np.argmin(faces, axis=1)
    cols = (shift[:, None] + np.arange(3)[None, :]) % 3
    return np.take_along_axis(faces, cols, axis=1)


def canonicalize(mesh: Mesh, resolution: int) -> CanonicalMesh:
    """Quantize a normalized mesh and put it in canonical order.

    Duplicate quantized vertices are merged; faces that become degenerate
    (repeated vertex) are dropped; duplicate faces are dropped keeping the
    lexicographically first occurrence.
    """
    if resolution < 1:
        raise ValidationError(f"resolution must be positive, got {resolution}")
    if mesh.n_vertices == 0 or mesh.n_faces == 0:
        raise DegenerateInputError("empty mesh")

    bins = quantize_coords(mesh.vertices, resolution)

    # merge duplicate quantized vertices, sort survivors by (z, y, x)
    uniq, inverse = np.unique(bins, axis=0, return_inverse=True)
    order = np.lexsort((uniq[:, 0], uniq[:, 1], uniq[:, 2]))
    rank = np.empty(len(uniq), dtype=np.int64)
    rank[order] = np.arange(len(uniq))
    vertices = uniq[order]
    faces = rank[inverse[mesh.faces]]

    # drop degenerate faces (any repeated vertex after merging)
    ok = (
        (faces[:, 0] != faces[:, 1])
        & (faces[:, 1] != faces[:, 2])
        & (faces[:, 0] != faces[:, 2])
    )
    faces = faces[ok]
    if len(faces) == 0:
        raise DegenerateInputError("no faces left after quantization cleanup")

    faces = _rotate_lowest_first(faces)
    faces = np.unique(faces, axis=0)  # dedup + lexicographic sort in one step

    # drop vertices no longer referenced by any face, recompacting indices
    used = np.unique(faces)
    if len(used) != len(vertices):
        remap = np.full(len(vertices), -1, dtype=np.int64)
        remap[used] = np.arange(len(used))
        vertices = vertices[used]
        faces = remap[faces]

    return CanonicalMesh(resolution=resolution, vertices=vertices, faces=faces)


def dequantize(cm: CanonicalMesh) -> Mesh:
    """Map bins back to bin-midpoint coordinates in [-1, 1]."""
    return Mesh(dequantize_bins(cm.vertices, cm.resolution), cm.faces.copy())


def canonical_equal(a: CanonicalMesh, b: CanonicalMesh) -> bool:
    return (
        a.resolution == b.resolution
        and a.vertices.shape == b.vertices.shape
        and a.faces.shape == b.faces.shape
        and bool(np.all(a.vertices == b.vertices))
        and bool(np.all(a.faces == b.faces))
    )
