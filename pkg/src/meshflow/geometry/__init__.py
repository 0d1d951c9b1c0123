from .attributes import (
    AdjacencyGraph,
    FaceAttributes,
    build_adjacency,
    encoder_features,
    face_attributes,
)
from .augment import augment
from .canonical import (
    CanonicalMesh,
    canonical_equal,
    canonicalize,
    dequantize,
    dequantize_bins,
    quantize_coords,
)
from .mesh import Mesh, normalize, parse_obj, write_obj
from .sampling import face_areas, hausdorff_distance, sample_surface_points
from .synthetic import (
    KINDS,
    generate_synthetic,
    make_box,
    make_grid,
    make_prism,
    make_pyramid,
)

__all__ = [
    "AdjacencyGraph",
    "CanonicalMesh",
    "FaceAttributes",
    "KINDS",
    "Mesh",
    "augment",
    "build_adjacency",
    "canonical_equal",
    "canonicalize",
    "dequantize",
    "dequantize_bins",
    "encoder_features",
    "face_areas",
    "face_attributes",
    "generate_synthetic",
    "hausdorff_distance",
    "make_box",
    "make_grid",
    "make_prism",
    "make_pyramid",
    "normalize",
    "parse_obj",
    "quantize_coords",
    "sample_surface_points",
    "write_obj",
]
