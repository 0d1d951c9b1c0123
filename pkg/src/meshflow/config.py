"""Flat key = value run configuration.

Every key has a documented default; unknown keys are rejected. The format is
line-oriented text for diffability and seed archival, overridable by CLI
flags. Desk-scale model profiles are the defaults here; the paper-scale
profiles (VAE encoder 12x768 / decoder 18x384, DiT 24x864, max 800 faces) are
kept in the field docs as reference points, not defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ValidationError


@dataclass
class RunConfig:
    # geometry / preprocessing
    seed: int = 0
    resolution: int = 128           # bins per axis (paper uses 128 or 256)
    face_budget: int = 800          # preprocess rejects meshes above this
    allow_oversize: bool = False
    sigma_hausdorff: float = 0.05   # filter threshold, normalized units
    hausdorff_samples: int = 10000
    split_ratio: int = 10           # train:val

    # augmentation (reconstruction stage)
    augment: bool = False
    augment_scale_min: float = 0.95
    augment_scale_max: float = 1.05
    augment_rotate: bool = True
    arbitrary_rotation: bool = False

    # VAE (desk profile; paper: enc 12 layers/768, dec 18 layers/384)
    latent_dim: int = 8
    vae_enc_layers: int = 4
    vae_dec_layers: int = 4
    vae_hidden: int = 192
    vae_heads: int = 4
    lambda_kl: float = 1e-4
    vae_steps: int = 6000
    vae_batch: int = 8
    vae_lr: float = 1e-4

    # DiT (desk profile; paper: 24 layers/864 hidden, max 800 faces)
    dit_layers: int = 6
    dit_hidden: int = 256
    dit_heads: int = 8
    max_faces: int = 64
    use_cross_attention: bool = False
    cond_dim: int = 32
    dit_steps: int = 6000
    dit_batch: int = 16
    dit_lr: float = 1e-4
    cond_dropout: float = 0.1

    # shared optimizer settings
    weight_decay: float = 0.01
    grad_clip: float = 1.0
    log_every: int = 200
    checkpoint_every: int = 2000

    # rectified flow / sampling
    time_m: float = 0.5             # logit-normal location
    time_s: float = 1.0             # logit-normal scale
    steps: int = 50                 # Euler steps
    cfg_w: float = 8.0              # single-condition guidance weight
    cfg_w1: float = 1.0             # dual: face-count weight
    cfg_w2: float = 5.0             # dual: feature weight

    # evaluation
    eval_points: int = 1024
    jsd_grid: int = 28

    def validate(self) -> "RunConfig":
        if self.resolution < 2:
            raise ValidationError("resolution must be >= 2")
        if self.time_s <= 0:
            raise ValidationError("time_s must be positive")
        if not 0.0 <= self.cond_dropout < 1.0:
            raise ValidationError("cond_dropout must be in [0, 1)")
        if self.split_ratio < 1:
            raise ValidationError("split_ratio must be >= 1")
        return self


_FIELDS = {f.name: f.type for f in fields(RunConfig)}


def _parse_value(key: str, raw: str):
    kind = _FIELDS[key]
    raw = raw.strip()
    if kind == "bool":
        if raw.lower() in ("true", "1", "yes", "on"):
            return True
        if raw.lower() in ("false", "0", "no", "off"):
            return False
        raise ValidationError(f"bad boolean for {key}: {raw!r}")
    if kind == "int":
        try:
            return int(raw)
        except ValueError:
            raise ValidationError(f"bad integer for {key}: {raw!r}") from None
    if kind == "float":
        try:
            return float(raw)
        except ValueError:
            raise ValidationError(f"bad float for {key}: {raw!r}") from None
    return raw


def apply_overrides(config: RunConfig, pairs: list[str]) -> RunConfig:
    """Apply ``key=value`` strings (CLI --set flags) in order."""
    for pair in pairs:
        key, sep, raw = pair.partition("=")
        key = key.strip()
        if not sep:
            raise ValidationError(f"override must look like key=value: {pair!r}")
        if key not in _FIELDS:
            raise ValidationError(f"unknown config key: {key!r}")
        setattr(config, key, _parse_value(key, raw))
    return config.validate()


def load_config(path: str | Path | None, overrides: list[str] | None = None) -> RunConfig:
    config = RunConfig()
    if path is not None:
        for lineno, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), start=1
        ):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            key, sep, raw = stripped.partition("=")
            key = key.strip()
            if not sep:
                raise ValidationError(f"config line {lineno}: expected key = value")
            if key not in _FIELDS:
                raise ValidationError(f"config line {lineno}: unknown key {key!r}")
            setattr(config, key, _parse_value(key, raw))
    if overrides:
        apply_overrides(config, overrides)
    return config.validate()


def dump_config(config: RunConfig) -> str:
    lines = [f"{f.name} = {getattr(config, f.name)}" for f in fields(RunConfig)]
    return "\n".join(lines) + "\n"


def config_snapshot(config: RunConfig) -> dict[str, str]:
    return {f.name: str(getattr(config, f.name)) for f in fields(RunConfig)}
