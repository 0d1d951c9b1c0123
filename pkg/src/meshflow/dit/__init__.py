from .generate import (
    CompletionResult,
    ConditionBatch,
    GenerationResult,
    complete,
    generate,
    generate_batch,
    toy_condition_features,
)
from .model import (
    ConditionBundle,
    DiT,
    DiTBlock,
    DiTConfig,
    PaddedBatch,
    TimestepEmbed,
    pad_batch,
)
from .train import DiTTrainConfig, sample_epoch_tokens, train_dit

__all__ = [
    "CompletionResult",
    "ConditionBatch",
    "ConditionBundle",
    "DiT",
    "DiTBlock",
    "DiTConfig",
    "DiTTrainConfig",
    "GenerationResult",
    "PaddedBatch",
    "TimestepEmbed",
    "complete",
    "generate",
    "generate_batch",
    "pad_batch",
    "sample_epoch_tokens",
    "toy_condition_features",
    "train_dit",
]
