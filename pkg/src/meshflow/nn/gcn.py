"""Single graph-convolution layer over the face-adjacency graph."""

from __future__ import annotations

import torch.nn.functional as F
from torch import Tensor, nn

from ..errors import ValidationError
from .blocks import init_projection


class GCNLayer(nn.Module):
    """Symmetric-normalized propagation with self-loops:
    silu(D^{-1/2} (A + I) D^{-1/2} X W + b).

    The normalized adjacency is supplied dense, (n, n) or batched (B, L, L);
    with no edges it is the identity and the layer reduces to a per-node
    affine map.
    """

    def __init__(self, in_dim: int, out_dim: int):
        super().__init__()
        self.linear = init_projection(nn.Linear(in_dim, out_dim))

    def forward(self, features: Tensor, adj_norm: Tensor) -> Tensor:
        if features.shape[-2] != adj_norm.shape[-1]:
            raise ValidationError(
                f"feature rows {features.shape[-2]} != graph nodes {adj_norm.shape[-1]}"
            )
        return F.silu(adj_norm @ self.linear(features))
