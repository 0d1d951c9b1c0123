"""Data augmentation: per-axis scaling and yaw quarter-turn rotation."""

from __future__ import annotations

import numpy as np

from ..seeding import rng as _stream_rng
from .mesh import Mesh, normalize


def augment(
    mesh: Mesh,
    seed: int,
    scale_range: tuple[float, float] = (0.95, 1.05),
    rotate: bool = True,
    arbitrary_rotation: bool = False,
) -> Mesh:
    """Random per-axis scale plus rotation about z, then re-normalization.

    The default rotation is a uniform choice among the four yaw quarter-turns,
    which keeps (z, y, x) ordering semantics and quantization error bounded.
    ``arbitrary_rotation`` switches to a uniform angle in [0, 2pi).
    Vertex and face counts are always preserved.
    """
    gen = _stream_rng(seed, "augment")
    lo, hi = scale_range
    scale = gen.uniform(lo, hi, size=3)
    verts = mesh.vertices * scale[None, :]

    if rotate:
        if arbitrary_rotation:
            theta = gen.uniform(0.0, 2.0 * np.pi)
            c, s = np.cos(theta), np.sin(theta)
            rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
            verts = verts @ rot.T
        else:
            # exact quarter turns, no trig roundoff
            k = int(gen.integers(0, 4))
            x, y = verts[:, 0].copy(), verts[:, 1].copy()
            if k == 1:
                verts[:, 0], verts[:, 1] = -y, x
            elif k == 2:
                verts[:, 0], verts[:, 1] = -x, -y
            elif k == 3:
                verts[:, 0], verts[:, 1] = y, -x

    return normalize(Mesh(verts, mesh.faces.copy()))
