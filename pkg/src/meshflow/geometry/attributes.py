"""Per-face geometric attributes and the face-adjacency graph."""

from __future__ import annotations

import warnings
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError
from .canonical import CanonicalMesh, dequantize_bins

ZERO_AREA_EPS = 1e-12


@dataclass
class FaceAttributes:
    """Attributes of one triangle in dequantized [-1, 1] coordinates."""

    face_index: int
    coords: np.ndarray   # (9,) x1 y1 z1 x2 y2 z2 x3 y3 z3
    normal: np.ndarray   # (3,) unit
    angles: np.ndarray   # (3,) interior angles at v1, v2, v3, radians
    area: float


@dataclass
class AdjacencyGraph:
    """Faces sharing exactly two vertex indices are connected."""

    n: int
    edges: set[tuple[int, int]] = field(default_factory=set)

    def degree(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def normalized_dense(self, dtype=np.float64) -> np.ndarray:
        """D^{-1/2} (A + I) D^{-1/2} as a dense (n, n) matrix."""
        a = np.eye(self.n, dtype=dtype)
        for i, j in self.edges:
            a[i, j] = 1.0
            a[j, i] = 1.0
        d = a.sum(axis=1)
        inv_sqrt = 1.0 / np.sqrt(d)
        return a * inv_sqrt[:, None] * inv_sqrt[None, :]


def _triangle_attrs(idx: int, corners: np.ndarray) -> FaceAttributes | None:
    """Attributes for one triangle given (3, 3) corner coordinates.

    Returns None for numerically zero-area faces.
    """
    v1, v2, v3 = corners
    e12, e13, e23 = v2 - v1, v3 - v1, v3 - v2
    cross = np.cross(e12, e13)
    cross_norm = float(np.linalg.norm(cross))
    area = 0.5 * cross_norm
    if area < ZERO_AREA_EPS:
        return None
    normal = cross / cross_norm

    def angle(u, v):
        cu, cv = np.linalg.norm(u), np.linalg.norm(v)
        c = np.clip(np.dot(u, v) / (cu * cv), -1.0, 1.0)
        return float(np.arccos(c))

    angles = np.array(
        [angle(e12, e13), angle(-e12, e23), angle(-e13, -e23)], dtype=np.float64
    )
    return FaceAttributes(
        face_index=idx,
        coords=corners.reshape(9).astype(np.float64),
        normal=normal,
        angles=angles,
        area=area,
    )


def face_attributes(cm: CanonicalMesh) -> list[FaceAttributes]:
    """Dequantized coords, unit normal, interior angles, and area per face.

    Numerically zero-area faces (area < 1e-12, e.g. collinear quantized
    vertices) are excluded with a warning; ``face_index`` keeps alignment.
    """
    coords = dequantize_bins(cm.vertices, cm.resolution)
    corners = coords[cm.faces]  # (n, 3, 3)
    out: list[FaceAttributes] = []
    dropped = []
    for i in range(cm.n):
        attrs = _triangle_attrs(i, corners[i])
        if attrs is None:
            dropped.append(i)
        else:
            out.append(attrs)
    if dropped:
        warnings.warn(
            f"excluded {len(dropped)} zero-area face(s): {dropped[:8]}",
            stacklevel=2,
        )
    return out


def build_adjacency(cm: CanonicalMesh) -> AdjacencyGraph:
    """Edge-hash adjacency: faces are adjacent iff they share exactly two
    vertex indices (a full edge). Faces sharing all three vertices (same
    vertex set, opposite winding) are not adjacent."""
    edge_to_faces: dict[tuple[int, int], list[int]] = defaultdict(list)
    for fi, (a, b, c) in enumerate(cm.faces):
        for u, v in ((a, b), (b, c), (a, c)):
            key = (int(u), int(v)) if u < v else (int(v), int(u))
            edge_to_faces[key].append(fi)

    graph = AdjacencyGraph(n=cm.n)
    face_sets = [frozenset(map(int, f)) for f in cm.faces]
    for faces_on_edge in edge_to_faces.values():
        if len(faces_on_edge) < 2:
            continue
        for i in range(len(faces_on_edge)):
            for j in range(i + 1, len(faces_on_edge)):
                fi, fj = faces_on_edge[i], faces_on_edge[j]
                if len(face_sets[fi] & face_sets[fj]) == 2:
                    graph.edges.add((min(fi, fj), max(fi, fj)))
    return graph


def encoder_features(attr_list: list[FaceAttributes], n_faces: int) -> np.ndarray:
    """Stack per-face attributes into the (n, 16) feature matrix consumed by
    the token encoder: 9 coords, 3 normal, 3 angles, 1 area.

    Requires attributes for every face (no zero-area exclusions).
    """
    if len(attr_list) != n_faces:
        raise ValidationError(
            f"need attributes for all {n_faces} faces, got {len(attr_list)} "
            "(zero-area faces present?)"
        )
    rows = np.zeros((n_faces, 16), dtype=np.float64)
    for a in attr_list:
        rows[a.face_index, 0:9] = a.coords
        rows[a.face_index, 9:12] = a.normal
        rows[a.face_index, 12:15] = a.angles
        rows[a.face_index, 15] = a.area
    return rows
