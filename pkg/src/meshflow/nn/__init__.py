from .attention import (
    NEG_INF,
    CrossAttention,
    SelfAttention,
    masked_attention,
    padding_mask,
    rope_rotate,
)
from .blocks import (
    AdaLNModulation,
    RMSNorm,
    SandwichResidual,
    SwiGLU,
    init_projection,
    modulate,
    swiglu_hidden_dim,
    zero_init,
)
from .gcn import GCNLayer
from .gradcheck import GradCheckReport, ParamCheck, grad_check, module_grad_check

__all__ = [
    "NEG_INF",
    "AdaLNModulation",
    "CrossAttention",
    "GCNLayer",
    "GradCheckReport",
    "ParamCheck",
    "RMSNorm",
    "SandwichResidual",
    "SelfAttention",
    "SwiGLU",
    "grad_check",
    "init_projection",
    "masked_attention",
    "modulate",
    "module_grad_check",
    "padding_mask",
    "rope_rotate",
    "swiglu_hidden_dim",
    "zero_init",
]
