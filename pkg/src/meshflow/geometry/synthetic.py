"""Parametric primitives used as desk-scale training data.

Face counts are exact by construction: box = 12, pyramid = 6,
n-gon prism = 4n - 4, g x g grid sheet = 2 g^2. All generators return
normalized meshes that survive canonicalization at resolution 128 with no
dropped faces for the default parameter ranges.
"""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from ..seeding import rng as _stream_rng
from .mesh import Mesh, normalize

KINDS = ("box", "pyramid", "prism", "grid")


def make_box(size=(1.0, 1.0, 1.0)) -> Mesh:
    sx, sy, sz = (float(s) / 2.0 for s in size)
    v = np.array(
        [
            [-sx, -sy, -sz], [sx, -sy, -sz], [sx, sy, -sz], [-sx, sy, -sz],
            [-sx, -sy, sz], [sx, -sy, sz], [sx, sy, sz], [-sx, sy, sz],
        ]
    )
    f = np.array(
        [
            [0, 2, 1], [0, 3, 2],  # bottom
            [4, 5, 6], [4, 6, 7],  # top
            [0, 1, 5], [0, 5, 4],  # front
            [2, 3, 7], [2, 7, 6],  # back
            [3, 0, 4], [3, 4, 7],  # left
            [1, 2, 6], [1, 6, 5],  # right
        ]
    )
    return Mesh(v, f)


def make_pyramid(base=(1.0, 1.0), height=1.0) -> Mesh:
    bx, by = float(base[0]) / 2.0, float(base[1]) / 2.0
    v = np.array(
        [
            [-bx, -by, 0.0], [bx, -by, 0.0], [bx, by, 0.0], [-bx, by, 0.0],
            [0.0, 0.0, float(height)],
        ]
    )
    f = np.array(
        [[0, 2, 1], [0, 3, 2], [0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]]
    )
    return Mesh(v, f)


def make_prism(n: int, radius=0.5, height=1.0) -> Mesh:
    if n < 3:
        raise ValidationError(f"prism needs n >= 3, got {n}")
    theta = 2.0 * np.pi * np.arange(n) / n
    ring = np.stack([radius * np.cos(theta), radius * np.sin(theta)], axis=1)
    bottom = np.concatenate([ring, np.zeros((n, 1))], axis=1)
    top = np.concatenate([ring, np.full((n, 1), float(height))], axis=1)
    v = np.concatenate([bottom, top], axis=0)

    faces = []
    for i in range(1, n - 1):  # caps, fan from vertex 0 of each ring
        faces.append([0, i + 1, i])           # bottom, normal -z
        faces.append([n, n + i, n + i + 1])   # top, normal +z
    for i in range(n):  # sides
        j = (i + 1) % n
        faces.append([i, j, n + j])
        faces.append([i, n + j, n + i])
    return Mesh(v, np.array(faces))


def make_grid(g: int, size=2.0, amplitude=0.0, phase=0.0) -> Mesh:
    """g x g cell sheet (2 g^2 faces) with optional sinusoidal height field."""
    if g < 1:
        raise ValidationError(f"grid needs g >= 1, got {g}")
    coords = np.linspace(-size / 2.0, size / 2.0, g + 1)
    xx, yy = np.meshgrid(coords, coords, indexing="ij")
    if amplitude != 0.0:
        zz = amplitude * np.sin(np.pi * xx / size + phase) * np.cos(np.pi * yy / size)
    else:
        zz = np.zeros_like(xx)
    v = np.stack([xx.ravel(), yy.ravel(), zz.ravel()], axis=1)

    def vid(i, j):
        return i * (g + 1) + j

    faces = []
    for i in range(g):
        for j in range(g):
            faces.append([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)])
            faces.append([vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)])
    return Mesh(v, np.array(faces))


def generate_synthetic(kind: str, params: dict | None = None, seed: int = 0) -> Mesh:
    """Build a primitive of the given kind; unspecified parameters are drawn
    from safe ranges using the seed. The result is normalized."""
    if kind not in KINDS:
        raise ValidationError(f"unknown kind {kind!r}, expected one of {KINDS}")
    params = dict(params or {})
    gen = _stream_rng(seed, f"synthetic-{kind}")

    try:
        if kind == "box":
            size = params.pop("size", tuple(gen.uniform(0.5, 1.0, size=3)))
            mesh = make_box(size)
        elif kind == "pyramid":
            base = params.pop("base", tuple(gen.uniform(0.6, 1.0, size=2)))
            height = params.pop("height", float(gen.uniform(0.5, 1.0)))
            mesh = make_pyramid(base, height)
        elif kind == "prism":
            n = int(params.pop("n", gen.integers(5, 12)))
            radius = float(params.pop("radius", gen.uniform(0.35, 0.5)))
            height = float(params.pop("height", gen.uniform(0.5, 1.0)))
            mesh = make_prism(n, radius, height)
        else:  # grid
            g = int(params.pop("g", 4))
            size = float(params.pop("size", 2.0))
            amplitude = float(params.pop("amplitude", gen.uniform(0.0, 0.25)))
            phase = float(params.pop("phase", gen.uniform(0.0, 2.0 * np.pi)))
            mesh = make_grid(g, size, amplitude, phase)
    except (TypeError, IndexError) as exc:
        raise ValidationError(f"invalid params for {kind}: {exc}") from exc
    if params:
        raise ValidationError(f"unknown params for {kind}: {sorted(params)}")
    return normalize(mesh)
