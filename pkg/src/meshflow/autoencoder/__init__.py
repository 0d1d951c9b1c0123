from .model import (
    FACE_FEATURE_DIM,
    DecoderConfig,
    EncoderConfig,
    FaceTokenDecoder,
    FaceTokenEncoder,
    LatentSequence,
    TransformerBlock,
    bins_to_canonical,
    decode_bins,
    encode,
    kl_loss,
    masked_reconstruction_loss,
    mesh_to_encoder_inputs,
    recon_metrics,
    recon_metrics_from_bins,
    reconstruct,
    reconstruct_bins,
    reconstruction_loss,
    reparameterize,
)
from .train import (
    PreparedMesh,
    VAETrainConfig,
    collate,
    cosine_lr,
    evaluate_reconstruction,
    masked_kl,
    prepare_mesh,
    train_vae,
)

__all__ = [
    "FACE_FEATURE_DIM",
    "DecoderConfig",
    "EncoderConfig",
    "FaceTokenDecoder",
    "FaceTokenEncoder",
    "LatentSequence",
    "PreparedMesh",
    "TransformerBlock",
    "VAETrainConfig",
    "bins_to_canonical",
    "collate",
    "cosine_lr",
    "decode_bins",
    "encode",
    "evaluate_reconstruction",
    "kl_loss",
    "masked_kl",
    "masked_reconstruction_loss",
    "mesh_to_encoder_inputs",
    "prepare_mesh",
    "recon_metrics",
    "recon_metrics_from_bins",
    "reconstruct",
    "reconstruct_bins",
    "reconstruction_loss",
    "reparameterize",
    "train_vae",
]
