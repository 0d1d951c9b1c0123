"""Triangle mesh container, OBJ subset I/O, and normalization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputError, ParseError, ValidationError


@dataclass
class Mesh:
    """Triangle mesh: float vertices (n, 3) and 0-based face indices (m, 3)."""

    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if self.faces.size and (
            self.faces.min() < 0 or self.faces.max() >= len(self.vertices)
        ):
            raise ValidationError("face index out of range")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def face_corners(self) -> np.ndarray:
        """Per-face vertex coordinates, shape (n_faces, 3, 3)."""
        return self.vertices[self.faces]


def parse_obj(data: bytes | str) -> Mesh:
    """Parse the OBJ subset: `v` lines with 3 reals, `f` lines with >=3
    1-based indices (polygons fan-triangulated from the first vertex).
    Unknown line types are ignored; `f` entries may carry /vt/vn suffixes.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    vertices: list[tuple[float, float, float]] = []
    faces: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(data.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "v":
            if len(parts) < 4:
                raise ParseError("vertex line needs 3 coordinates", line=lineno)
            try:
                x, y, z = (float(p) for p in parts[1:4])
            except ValueError:
                raise ParseError(f"malformed number in {raw!r}", line=lineno) from None
            vertices.append((x, y, z))
        elif parts[0] == "f":
            if len(parts) < 4:
                raise ParseError("face line needs at least 3 indices", line=lineno)
            try:
                idx = [int(p.split("/")[0]) for p in parts[1:]]
            except ValueError:
                raise ParseError(f"malformed index in {raw!r}", line=lineno) from None
            for i in idx:
                if i < 1 or i > len(vertices):
                    raise ValidationError(
                        f"line {lineno}: face index {i} out of range "
                        f"(have {len(vertices)} vertices)"
                    )
            # fan triangulation from the first vertex, 0-based output
            for a, b in zip(idx[1:-1], idx[2:]):
                faces.append((idx[0] - 1, a - 1, b - 1))
        # every other line type (vn, vt, s, o, g, mtllib, ...) is ignored
    return Mesh(np.array(vertices, dtype=np.float64).reshape(-1, 3),
                np.array(faces, dtype=np.int64).reshape(-1, 3))


def write_obj(mesh: Mesh) -> bytes:
    """Serialize to OBJ text. Coordinates at 9 significant digits, so
    parse_obj(write_obj(m)) reproduces m up to that formatting."""
    lines = []
    for x, y, z in mesh.vertices:
        lines.append(f"v {x:.9g} {y:.9g} {z:.9g}")
    for a, b, c in mesh.faces:
        lines.append(f"f {a + 1} {b + 1} {c + 1}")
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


def normalize(mesh: Mesh) -> Mesh:
    """Translate to the bounding-box center and scale uniformly so the longest
    axis spans exactly [-1, 1]. Aspect ratio is preserved."""
    if mesh.n_vertices == 0:
        raise DegenerateInputError("empty mesh")
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    extent = float((hi - lo).max())
    if extent <= 0.0:
        raise DegenerateInputError("mesh has zero extent")
    center = (hi + lo) / 2.0
    scaled = (mesh.vertices - center) * (2.0 / extent)
    return Mesh(scaled, mesh.faces.copy())
