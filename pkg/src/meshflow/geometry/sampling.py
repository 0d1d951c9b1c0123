"""Surface point sampling and the sampled Hausdorff distance."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from ..errors import DegenerateInputError, ValidationError
from ..seeding import rng as _stream_rng
from .mesh import Mesh


def face_areas(mesh: Mesh) -> np.ndarray:
    corners = mesh.face_corners()
    cross = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
    return 0.5 * np.linalg.norm(cross, axis=1)


def sample_surface_points(mesh: Mesh, count: int, seed: int) -> np.ndarray:
    """Uniform area-weighted surface samples, shape (count, 3).

    Faces are chosen with probability proportional to area; points within a
    face via barycentric (u, v) with reflection. Deterministic under seed.
    """
    if count < 1:
        raise ValidationError(f"count must be positive, got {count}")
    areas = face_areas(mesh)
    total = areas.sum()
    if not total > 0.0:
        raise DegenerateInputError("mesh has zero total surface area")

    gen = _stream_rng(seed, "surface-sample")
    face_idx = gen.choice(len(areas), size=count, p=areas / total)
    u = gen.random(count)
    v = gen.random(count)
    flip = u + v > 1.0
    u[flip] = 1.0 - u[flip]
    v[flip] = 1.0 - v[flip]

    corners = mesh.face_corners()[face_idx]
    a, b, c = corners[:, 0], corners[:, 1], corners[:, 2]
    return a + u[:, None] * (b - a) + v[:, None] * (c - a)


def hausdorff_distance(a: Mesh, b: Mesh, samples: int = 10_000, seed: int = 0) -> float:
    """Symmetric point-sampled Hausdorff distance.

    Both meshes are sampled with the same seed, so identical meshes give 0
    exactly. Accuracy is bounded by sample density (tests pin 0.05 at 10k
    samples on unit-scale geometry).
    """
    pa = sample_surface_points(a, samples, seed)
    pb = sample_surface_points(b, samples, seed)
    d_ab = cKDTree(pb).query(pa, k=1)[0].max()
    d_ba = cKDTree(pa).query(pb, k=1)[0].max()
    return float(max(d_ab, d_ba))
